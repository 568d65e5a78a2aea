#pragma once

// Runtime monitors for one iteration of a control loop. Monitors relate
// prior variables x to posterior variables x_post and are synthesized by
// symbolic execution followed by elimination of ODE time symbols.

#include <map>
#include <string>
#include <vector>

#include "dl/arith.hpp"
#include "dl/model_file.hpp"

namespace dl {

class SynthesisError : public Error {
 public:
  SynthesisError(std::string kind, const std::string& detail)
      : Error(kind + ": " + detail), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

VarName post_var(const VarName& x);  // x -> x_post

struct SymState {
  TermSubst update;             // current value of each modified variable
  std::vector<Formula> path;    // path condition as a conjunct list
  std::vector<VarName> times;   // ODE durations still to be eliminated
};

struct SymContext {
  std::vector<Formula> assumptions;  // facts about constants, e.g. g>0
  VarSet taken;                      // names fresh time symbols must avoid
  std::vector<std::string> warnings;
};

// Throws SynthesisError("LoopNotSupported") or MissingSolution.
std::vector<SymState> symexec(const Program& p, SymContext& ctx);
std::vector<SymState> symexec(const Program& p, const SymState& from, SymContext& ctx);

// Solves an equation of `conjuncts` that is linear in `t` with a
// coefficient of known sign, substitutes the solution into every conjunct
// and clears denominators. Throws SynthesisError("NotLinearInTime") or
// SynthesisError("AmbiguousCoefficientSign").
std::vector<Formula> eliminate_time(const std::vector<Formula>& conjuncts, const VarName& t,
                                    const std::vector<Formula>& assumptions);

struct Monitor {
  enum class Kind { Controller, Model } kind = Kind::Controller;
  Formula formula;
  std::vector<std::string> warnings;
};

Monitor synth_controller_monitor(const Program& ctrl, const VarSet& state_vars);
Monitor synth_model_monitor(const Program& body, const VarSet& state_vars, const std::vector<Formula>& assumptions);

// `prior` holds unsuffixed variables, `post` the _post ones.
bool eval_monitor(const Formula& monitor, const ExactState& prior, const ExactState& post);

// ------------------------------------------------------------ corpus shape

// A problem of the form  A -> [{plant; ctrl}*]B.
struct LoopModel {
  Formula init;
  Program body, plant, ctrl;
  Formula safety;
  VarSet state_vars;                 // variables bound by the body
  std::vector<Formula> assumptions;  // conjuncts of A over constants only
};

LoopModel extract_loop_model(const ModelFile& m);

// -------------------------------------------------------------- equivalence

struct GridSpec {
  std::map<VarName, std::vector<Rational>> values;
  Formula context;  // points outside it are skipped; null means true
};

struct EquivResult {
  bool equivalent = true;
  size_t evaluated = 0;  // grid points inside the context
  ExactState mismatch;   // lowest-index disagreement
};

EquivResult monitor_equiv(const Formula& a, const Formula& b, const GridSpec& grid);
EquivResult monitor_equiv_serial(const Formula& a, const Formula& b, const GridSpec& grid);

// ------------------------------------------------------------ compiled form

enum class OpCode { Load, Const, Add, Sub, Mul, Pow, Ge, Eq, And, Or, Not };

struct Op {
  OpCode code;
  std::string var;    // Load
  Rational value;     // Const
  unsigned power = 0; // Pow
};

// Stack code over exact rationals; truth values are 0 and 1.
std::vector<Op> compile_monitor(const Formula& f);
bool run_ops(const std::vector<Op>& ops, const ExactState& frame);
std::string serialize_ops(const std::vector<Op>& ops);
std::vector<Op> parse_ops(std::string_view text);

}  // namespace dl
