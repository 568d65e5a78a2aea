#pragma once

// SMT-LIB 2 bridge to an external nonlinear real arithmetic solver.

#include <optional>
#include <string>
#include <vector>

#include "dl/semantics.hpp"

namespace dl {

struct SmtConfig {
  std::string path;                    // empty: disabled
  std::vector<std::string> args{"-in"};
  int timeout_ms = 10000;
  std::string log_dir;                 // scripts are written here when set

  bool enabled() const { return !path.empty(); }
};

// Layering, later entries win: defaults, config file (key = value lines
// with keys smt, smt_args, smt_timeout_ms, smt_log_dir), environment
// (DLCHECK_SMT, DLCHECK_SMT_ARGS, DLCHECK_SMT_TIMEOUT_MS,
// DLCHECK_SMT_LOG_DIR), then the command-line flag ("off" disables, any
// other value is the solver path). Without any setting the solver is off.
SmtConfig load_smt_config(const std::optional<std::string>& config_file,
                          const std::optional<std::string>& flag);

// Quoted symbol for a variable key: |x|, |x'|.
std::string smt_symbol(const std::string& key);
std::string smt_term(const Term& t);
std::string smt_formula(const Formula& f);

// Script asserting `negated_goal` with every variable of `vars` declared.
std::string smt_script(const Formula& negated_goal, const VarSet& vars);

enum class SmtStatus { Sat, Unsat, Unknown };

struct SmtAnswer {
  SmtStatus status = SmtStatus::Unknown;
  // Rational model for sat answers; absent when some value is not rational.
  std::optional<ExactState> model;
  std::string reason;
};

// Parses "sat"/"unsat"/"unknown" followed by an optional (model ...)
// s-expression. Throws ProtocolError on anything else.
SmtAnswer parse_smt_output(const std::string& output, const VarSet& vars);

// Runs the solver. Throws SolverUnavailable when it cannot be started.
SmtAnswer run_smt(const SmtConfig& cfg, const Formula& negated_goal, const VarSet& vars);

}  // namespace dl
