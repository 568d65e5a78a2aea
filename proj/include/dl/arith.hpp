#pragma once

// Layered validity checking for real-arithmetic sequents: ground
// evaluation, polynomial identities, Fourier-Motzkin with square
// abstraction, then an optional SMT oracle.

#include <string>
#include <vector>

#include "dl/semantics.hpp"
#include "dl/smt.hpp"

namespace dl {

// Γ ⊢ Δ over program-free, quantifier-free formulas, read as universally
// closed over its free variables.
struct ArithGoal {
  std::vector<Formula> antecedent;
  std::vector<Formula> succedent;

  Formula as_formula() const;  // ∧Γ -> ∨Δ
  VarSet vars() const;
  std::string to_string() const;
};

enum class VerdictKind { Valid, Invalid, Unknown };

struct Verdict {
  VerdictKind kind = VerdictKind::Unknown;
  std::string method;        // "ground", "poly", "fm", "smt"
  ExactState counterexample; // Invalid only
  std::string reason;        // Unknown only

  static Verdict valid(std::string method) { return {VerdictKind::Valid, std::move(method), {}, {}}; }
  static Verdict invalid(std::string method, ExactState cex) {
    return {VerdictKind::Invalid, std::move(method), std::move(cex), {}};
  }
  static Verdict unknown(std::string reason) { return {VerdictKind::Unknown, "", {}, std::move(reason)}; }
};

struct ArithPolicy {
  SmtConfig smt;  // disabled unless a path is set
};

// Evaluates ∧Γ -> ∨Δ in an exact state.
bool goal_holds(const ArithGoal& g, const ExactState& s);

Verdict ground_decide(const ArithGoal& g);
Verdict poly_decide(const ArithGoal& g);
Verdict fm_decide(const ArithGoal& g);
Verdict smt_decide(const ArithGoal& g, const SmtConfig& cfg);
Verdict decide(const ArithGoal& g, const ArithPolicy& policy);

// ------------------------------------------------------ linear machinery

// sum coeffs[v]*v + constant ⋈ 0 with ⋈ one of =, >=, >.
enum class Rel { Eq, Geq, Gt };

struct LinearConstraint {
  std::map<std::string, Rational> coeffs;
  Rational constant;
  Rel rel = Rel::Geq;

  bool holds(const std::map<std::string, Rational>& values) const;
};

// Fourier-Motzkin feasibility over the rationals. Returns a satisfying
// assignment of every mentioned variable, or nullopt when infeasible.
std::optional<std::map<std::string, Rational>> fm_feasible(std::vector<LinearConstraint> constraints);

}  // namespace dl
