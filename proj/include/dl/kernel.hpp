#pragma once

// The trusted proof checker. Rules are schema instantiations applied at the
// top level of one sequent formula, each with its side conditions checked
// before anything is emitted.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dl/arith.hpp"
#include "dl/model_file.hpp"

namespace dl {

struct Sequent {
  std::vector<Formula> antecedent;
  std::vector<Formula> succedent;

  std::string to_string() const;
  bool operator==(const Sequent& o) const;
};

struct ProofGoal {
  int id = 0;
  Sequent sequent;
};

enum class Side { Antecedent, Succedent };

struct Target {
  Side side = Side::Succedent;
  size_t index = 0;
};

// A precondition of the requested rule does not hold. `kind` names the
// failed check, e.g. "NotALoop" or "SolutionCheckFailed".
class RuleError : public Error {
 public:
  RuleError(std::string kind, const std::string& detail) : Error(kind + ": " + detail), kind_(std::move(kind)) {}
  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

struct RuleArgs {
  Formula invariant;                          // loop
  Formula intermediate;                       // M (B), K (P)
  std::optional<SolutionAnnotation> solution; // solve
  Term witness;                               // allL, existsR
};

struct ProofStep {
  int goal = 0;
  std::string rule;
  std::optional<Target> target;
  RuleArgs args;
  int line = 0;  // script line, for diagnostics
};

const std::vector<std::string>& rule_names();

// Propositional closure plus Skolemization. Closed goals vanish from the
// output; an untouched goal comes back as the single element.
std::vector<Sequent> normalize(const Sequent& s);

// One rule application without normalization. Returns the raw premises;
// `close` is handled by the session.
std::vector<Sequent> apply_rule(const Sequent& s, const std::string& rule, const std::optional<Target>& target,
                                const RuleArgs& args);

enum class ResultKind { Closed, Open, OracleAssumed, Refuted };
std::string to_string(ResultKind k);

struct ProofResult {
  ResultKind kind = ResultKind::Open;
  std::vector<ProofGoal> open_goals;
  std::vector<ProofGoal> oracle_assumed;  // Unknown leaves closed by policy
  size_t steps = 0;
  std::map<std::string, size_t> arith_methods;  // method -> leaves closed
  std::optional<ProofGoal> refuted_goal;
  ExactState counterexample;

  // One-line JSON record.
  std::string to_json() const;
};

struct GoalNode {
  int id = 0;
  int parent = -1;
  std::string rule;  // rule that produced this goal ("normalize" included)
  Sequent sequent;
  std::vector<int> children;
  std::string status = "open";  // open, split, closed, assumed, refuted
};

struct ClosePolicy {
  ArithPolicy arith;
  bool permissive = false;  // Unknown leaves go to oracle_assumed
};

class ProofSession {
 public:
  ProofSession(Formula conjecture, ClosePolicy policy);

  // Applies one step and auto-normalizes its premises. Returns the ids of
  // the resulting open goals. Throws RuleError.
  std::vector<int> apply(const ProofStep& step);

  const std::map<int, Sequent>& open_goals() const { return open_; }
  const std::vector<GoalNode>& tree() const { return tree_; }
  ProofResult result() const;
  bool refuted() const { return refuted_.has_value(); }

 private:
  int add_node(int parent, const std::string& rule, Sequent s, bool open);
  std::vector<int> settle(int parent, Sequent s);
  void close_goal(int id, const Sequent& s);

  ClosePolicy policy_;
  std::vector<GoalNode> tree_;
  std::map<int, Sequent> open_;
  std::vector<ProofGoal> assumed_;
  std::map<std::string, size_t> methods_;
  std::optional<ProofGoal> refuted_;
  ExactState counterexample_;
  size_t steps_ = 0;
};

// Replays `script` against the specialized problem of `m`. Step arguments
// are specialized with the same constant bindings. Throws RuleError with
// the failing step's line and goal.
ProofResult check_proof(const ModelFile& m, const std::vector<ProofStep>& script, const ClosePolicy& policy,
                        std::vector<GoalNode>* tree = nullptr);

}  // namespace dl
