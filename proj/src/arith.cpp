#include "dl/arith.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "dl/polynomial.hpp"

namespace dl {

Formula ArithGoal::as_formula() const {
  return make_imply(conjunction(antecedent), disjunction(succedent));
}

VarSet ArithGoal::vars() const {
  VarSet out;
  for (const auto& f : antecedent) {
    auto v = free_vars(f);
    out.insert(v.begin(), v.end());
  }
  for (const auto& f : succedent) {
    auto v = free_vars(f);
    out.insert(v.begin(), v.end());
  }
  return out;
}

std::string ArithGoal::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < antecedent.size(); ++i) os << (i ? ", " : "") << dl::to_string(antecedent[i]);
  os << (antecedent.empty() ? "|- " : " |- ");
  for (size_t i = 0; i < succedent.size(); ++i) os << (i ? ", " : "") << dl::to_string(succedent[i]);
  return os.str();
}

bool goal_holds(const ArithGoal& g, const ExactState& s) {
  for (const auto& f : g.antecedent)
    if (!holds_qf(s, f)) return true;
  for (const auto& f : g.succedent)
    if (holds_qf(s, f)) return true;
  return false;
}

Verdict ground_decide(const ArithGoal& g) {
  if (!g.vars().empty()) return Verdict::unknown("goal has free variables");
  try {
    if (goal_holds(g, {})) return Verdict::valid("ground");
    return Verdict::invalid("ground", {});
  } catch (const NotQuantifierFree&) {
    return Verdict::unknown("goal is not quantifier-free");
  }
}

Verdict poly_decide(const ArithGoal& g) {
  for (const auto& f : g.succedent) {
    bool reflexive = f->kind == FormulaKind::Eq || f->kind == FormulaKind::Geq || f->kind == FormulaKind::Leq;
    if (reflexive && poly_zero(f->lhs, f->rhs)) return Verdict::valid("poly");
  }
  return Verdict::unknown("no succedent comparison is a polynomial identity");
}

// -------------------------------------------------------- Fourier-Motzkin

bool LinearConstraint::holds(const std::map<std::string, Rational>& values) const {
  Rational sum = constant;
  for (const auto& [v, c] : coeffs) {
    auto it = values.find(v);
    if (it != values.end()) sum += c * it->second;
  }
  switch (rel) {
    case Rel::Eq: return sgn(sum) == 0;
    case Rel::Geq: return sgn(sum) >= 0;
    case Rel::Gt: return sgn(sum) > 0;
  }
  return false;
}

namespace {

struct FmLimit {};

constexpr size_t kMaxConstraints = 4000;

bool constant_ok(const LinearConstraint& c) {
  switch (c.rel) {
    case Rel::Eq: return sgn(c.constant) == 0;
    case Rel::Geq: return sgn(c.constant) >= 0;
    case Rel::Gt: return sgn(c.constant) > 0;
  }
  return false;
}

// Replaces v by (expr.coeffs . vars + expr.constant) in c.
LinearConstraint replace(const LinearConstraint& c, const std::string& v, const LinearConstraint& expr) {
  auto it = c.coeffs.find(v);
  if (it == c.coeffs.end()) return c;
  LinearConstraint out = c;
  Rational k = it->second;
  out.coeffs.erase(v);
  for (const auto& [w, a] : expr.coeffs) {
    Rational& slot = out.coeffs[w];
    slot += k * a;
    if (sgn(slot) == 0) out.coeffs.erase(w);
  }
  out.constant += k * expr.constant;
  return out;
}

Rational evaluate_expr(const LinearConstraint& expr, const std::map<std::string, Rational>& values) {
  Rational sum = expr.constant;
  for (const auto& [w, a] : expr.coeffs) {
    auto it = values.find(w);
    if (it != values.end()) sum += a * it->second;
  }
  return sum;
}

// Scales so the largest absolute coefficient is 1; makes duplicates equal.
LinearConstraint normalized(LinearConstraint c) {
  Rational m = 0;
  for (const auto& [v, a] : c.coeffs) m = std::max(m, Rational(abs(a)));
  if (sgn(m) == 0) return c;
  for (auto& [v, a] : c.coeffs) a /= m;
  c.constant /= m;
  return c;
}

struct ConstraintLess {
  bool operator()(const LinearConstraint& a, const LinearConstraint& b) const {
    if (a.rel != b.rel) return a.rel < b.rel;
    if (a.constant != b.constant) return a.constant < b.constant;
    return a.coeffs < b.coeffs;
  }
};

}  // namespace

std::optional<std::map<std::string, Rational>> fm_feasible(std::vector<LinearConstraint> cs) {
  std::set<std::string> all_vars;
  for (const auto& c : cs)
    for (const auto& [v, a] : c.coeffs) all_vars.insert(v);

  // Gaussian elimination of equalities.
  std::vector<std::pair<std::string, LinearConstraint>> solved;
  for (;;) {
    auto eq = std::find_if(cs.begin(), cs.end(), [](const LinearConstraint& c) {
      return c.rel == Rel::Eq && !c.coeffs.empty();
    });
    if (eq == cs.end()) break;
    LinearConstraint e = *eq;
    cs.erase(eq);
    auto [v, a] = *e.coeffs.begin();
    LinearConstraint expr;
    for (const auto& [w, b] : e.coeffs)
      if (w != v) expr.coeffs[w] = -b / a;
    expr.constant = -e.constant / a;
    for (auto& c : cs) c = replace(c, v, expr);
    for (auto& s : solved) s.second = replace(s.second, v, expr);
    solved.emplace_back(v, expr);
  }

  std::vector<LinearConstraint> rest;
  for (const auto& c : cs) {
    if (c.coeffs.empty()) {
      if (!constant_ok(c)) return std::nullopt;
    } else {
      rest.push_back(normalized(c));
    }
  }

  // Inequality elimination; remember each variable's bounds for the witness.
  std::vector<std::pair<std::string, std::vector<LinearConstraint>>> eliminated;
  for (;;) {
    std::map<std::string, std::pair<size_t, size_t>> counts;
    for (const auto& c : rest)
      for (const auto& [v, a] : c.coeffs) (sgn(a) > 0 ? counts[v].first : counts[v].second)++;
    if (counts.empty()) break;
    auto best = std::min_element(counts.begin(), counts.end(), [](const auto& x, const auto& y) {
      return x.second.first * x.second.second < y.second.first * y.second.second;
    });
    std::string v = best->first;
    std::vector<LinearConstraint> lower, upper, keep, bounds;
    for (auto& c : rest) {
      auto it = c.coeffs.find(v);
      if (it == c.coeffs.end()) keep.push_back(std::move(c));
      else (sgn(it->second) > 0 ? lower : upper).push_back(c);
    }
    bounds.insert(bounds.end(), lower.begin(), lower.end());
    bounds.insert(bounds.end(), upper.begin(), upper.end());
    std::set<LinearConstraint, ConstraintLess> next(keep.begin(), keep.end());
    for (const auto& l : lower)
      for (const auto& u : upper) {
        Rational a = l.coeffs.at(v), b = -u.coeffs.at(v);
        LinearConstraint comb;
        comb.rel = (l.rel == Rel::Gt || u.rel == Rel::Gt) ? Rel::Gt : Rel::Geq;
        comb.constant = b * l.constant + a * u.constant;
        for (const auto& [w, k] : l.coeffs)
          if (w != v) comb.coeffs[w] += b * k;
        for (const auto& [w, k] : u.coeffs)
          if (w != v) comb.coeffs[w] += a * k;
        for (auto it = comb.coeffs.begin(); it != comb.coeffs.end();)
          it = sgn(it->second) == 0 ? comb.coeffs.erase(it) : std::next(it);
        if (comb.coeffs.empty()) {
          if (!constant_ok(comb)) return std::nullopt;
          continue;
        }
        next.insert(normalized(comb));
        if (next.size() > kMaxConstraints) throw FmLimit{};
      }
    rest.assign(next.begin(), next.end());
    eliminated.emplace_back(v, std::move(bounds));
  }

  std::map<std::string, Rational> values;
  for (auto it = eliminated.rbegin(); it != eliminated.rend(); ++it) {
    const std::string& v = it->first;
    std::optional<Rational> lo, hi;
    bool lo_strict = false, hi_strict = false;
    for (const auto& c : it->second) {
      Rational a = c.coeffs.at(v);
      LinearConstraint others = c;
      others.coeffs.erase(v);
      Rational bound = -evaluate_expr(others, values) / a;
      bool strict = c.rel == Rel::Gt;
      if (sgn(a) > 0) {
        if (!lo || bound > *lo) {
          lo = bound;
          lo_strict = strict;
        } else if (bound == *lo) {
          lo_strict = lo_strict || strict;
        }
      } else {
        if (!hi || bound < *hi) {
          hi = bound;
          hi_strict = strict;
        } else if (bound == *hi) {
          hi_strict = hi_strict || strict;
        }
      }
    }
    Rational value = 0;
    if (lo && hi) value = *lo == *hi ? *lo : Rational((*lo + *hi) / 2);
    else if (lo) value = lo_strict ? Rational(*lo + 1) : *lo;
    else if (hi) value = hi_strict ? Rational(*hi - 1) : *hi;
    values[v] = value;
  }
  for (auto it = solved.rbegin(); it != solved.rend(); ++it) values[it->first] = evaluate_expr(it->second, values);
  for (const auto& v : all_vars) values.emplace(v, Rational(0));
  return values;
}

// ---------------------------------------------------------------- fm_decide

namespace {

struct PAtom {
  Polynomial p;
  Rel rel;
};
using Conj = std::vector<PAtom>;
using Dnf = std::vector<Conj>;

struct Unsupported {};

constexpr size_t kMaxDisjuncts = 4096;

bool atom_constant_holds(const PAtom& a) {
  Rational c = a.p.constant_term();
  switch (a.rel) {
    case Rel::Eq: return sgn(c) == 0;
    case Rel::Geq: return sgn(c) >= 0;
    case Rel::Gt: return sgn(c) > 0;
  }
  return false;
}

Dnf single(PAtom a) {
  if (a.p.is_constant()) return atom_constant_holds(a) ? Dnf{Conj{}} : Dnf{};
  return Dnf{Conj{std::move(a)}};
}

Dnf dnf_or(Dnf a, const Dnf& b) {
  a.insert(a.end(), b.begin(), b.end());
  if (a.size() > kMaxDisjuncts) throw Unsupported{};
  return a;
}

Dnf dnf_and(const Dnf& a, const Dnf& b) {
  Dnf out;
  for (const auto& x : a)
    for (const auto& y : b) {
      Conj c = x;
      c.insert(c.end(), y.begin(), y.end());
      out.push_back(std::move(c));
      if (out.size() > kMaxDisjuncts) throw Unsupported{};
    }
  return out;
}

Dnf to_dnf(const Formula& f, bool positive) {
  auto cmp = [&](FormulaKind k) {
    Polynomial d = poly_normalize(f->lhs) - poly_normalize(f->rhs);
    switch (k) {
      case FormulaKind::Eq: return single({d, Rel::Eq});
      case FormulaKind::Neq: return dnf_or(single({d, Rel::Gt}), single({-d, Rel::Gt}));
      case FormulaKind::Geq: return single({d, Rel::Geq});
      case FormulaKind::Gt: return single({d, Rel::Gt});
      case FormulaKind::Leq: return single({-d, Rel::Geq});
      case FormulaKind::Lt: return single({-d, Rel::Gt});
      default: throw Unsupported{};
    }
  };
  auto negate = [](FormulaKind k) {
    switch (k) {
      case FormulaKind::Eq: return FormulaKind::Neq;
      case FormulaKind::Neq: return FormulaKind::Eq;
      case FormulaKind::Geq: return FormulaKind::Lt;
      case FormulaKind::Gt: return FormulaKind::Leq;
      case FormulaKind::Leq: return FormulaKind::Gt;
      default: return FormulaKind::Geq;
    }
  };
  switch (f->kind) {
    case FormulaKind::True: return positive ? Dnf{Conj{}} : Dnf{};
    case FormulaKind::False: return positive ? Dnf{} : Dnf{Conj{}};
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      return cmp(positive ? f->kind : negate(f->kind));
    case FormulaKind::Not: return to_dnf(f->left, !positive);
    case FormulaKind::And:
      return positive ? dnf_and(to_dnf(f->left, true), to_dnf(f->right, true))
                      : dnf_or(to_dnf(f->left, false), to_dnf(f->right, false));
    case FormulaKind::Or:
      return positive ? dnf_or(to_dnf(f->left, true), to_dnf(f->right, true))
                      : dnf_and(to_dnf(f->left, false), to_dnf(f->right, false));
    case FormulaKind::Imply:
      return positive ? dnf_or(to_dnf(f->left, false), to_dnf(f->right, true))
                      : dnf_and(to_dnf(f->left, true), to_dnf(f->right, false));
    case FormulaKind::Equiv: {
      Dnf both = dnf_and(to_dnf(f->left, true), to_dnf(f->right, true));
      Dnf neither = dnf_and(to_dnf(f->left, false), to_dnf(f->right, false));
      Dnf l_only = dnf_and(to_dnf(f->left, true), to_dnf(f->right, false));
      Dnf r_only = dnf_and(to_dnf(f->left, false), to_dnf(f->right, true));
      return positive ? dnf_or(both, neither) : dnf_or(l_only, r_only);
    }
    default: throw Unsupported{};
  }
}

enum class ConjResult { Infeasible, Refuted, Open };

struct ConjOutcome {
  ConjResult result;
  ExactState witness;
};

ConjOutcome check_conjunction(Conj atoms, const ArithGoal& g, const VarSet& goal_vars) {
  // Equalities in which some variable occurs linearly with a constant
  // coefficient are solved for that variable and substituted away.
  std::vector<std::pair<std::string, Polynomial>> elim;
  bool progress = true;
  while (progress) {
    progress = false;
    for (size_t i = 0; i < atoms.size() && !progress; ++i) {
      if (atoms[i].rel != Rel::Eq) continue;
      for (const auto& v : atoms[i].p.variables()) {
        if (atoms[i].p.degree_in(v) != 1) continue;
        auto cs = atoms[i].p.coefficients_in(v);
        if (!cs.at(1).is_constant()) continue;
        Rational c = cs.at(1).constant_term();
        Polynomial rest = cs.count(0) ? cs.at(0) : Polynomial();
        Polynomial value = (-rest).scaled(Rational(1 / c));
        atoms.erase(atoms.begin() + static_cast<long>(i));
        Conj next;
        for (auto& a : atoms) {
          PAtom b{a.p.substitute(v, value), a.rel};
          if (b.p.is_constant()) {
            if (!atom_constant_holds(b)) return {ConjResult::Infeasible, {}};
            continue;
          }
          next.push_back(std::move(b));
        }
        atoms = std::move(next);
        for (auto& e : elim) e.second = e.second.substitute(v, value);
        elim.emplace_back(v, value);
        progress = true;
        break;
      }
    }
  }

  // Square abstraction of nonlinear monomials.
  std::map<Monomial, std::string> abstract;
  std::vector<LinearConstraint> lin;
  for (const auto& a : atoms) {
    LinearConstraint c;
    c.rel = a.rel;
    for (const auto& [m, k] : a.p.terms()) {
      unsigned deg = 0;
      for (const auto& [v, e] : m) deg += e;
      if (deg == 0) {
        c.constant += k;
      } else if (deg == 1) {
        c.coeffs[m.begin()->first] += k;
      } else {
        auto [it, fresh] = abstract.emplace(m, "#m" + std::to_string(abstract.size()));
        c.coeffs[it->second] += k;
        if (fresh) {
          bool even = std::all_of(m.begin(), m.end(), [](const auto& ve) { return ve.second % 2 == 0; });
          if (even) lin.push_back(LinearConstraint{{{it->second, Rational(1)}}, Rational(0), Rel::Geq});
        }
      }
    }
    lin.push_back(std::move(c));
  }

  auto model = fm_feasible(lin);
  if (!model) return {ConjResult::Infeasible, {}};

  std::map<std::string, Rational> values;
  for (const auto& [v, r] : *model)
    if (v[0] != '#') values[v] = r;
  for (const auto& v : goal_vars) values.emplace(v.key(), Rational(0));
  for (auto it = elim.rbegin(); it != elim.rend(); ++it)
    values[it->first] = it->second.evaluate<Rational>([&](const std::string& w) {
      auto f = values.find(w);
      return f == values.end() ? Rational(0) : f->second;
    });

  ExactState witness;
  for (const auto& v : goal_vars) witness[v] = values.at(v.key());
  if (!goal_holds(g, witness)) return {ConjResult::Refuted, witness};
  return {ConjResult::Open, witness};
}

}  // namespace

Verdict fm_decide(const ArithGoal& g) {
  for (const auto& f : g.antecedent)
    if (!is_quantifier_free(f)) return Verdict::unknown("quantified or modal formula");
  for (const auto& f : g.succedent)
    if (!is_quantifier_free(f)) return Verdict::unknown("quantified or modal formula");
  try {
    Formula negated = make_and(conjunction(g.antecedent), make_not(disjunction(g.succedent)));
    Dnf cases = to_dnf(negated, true);
    VarSet vars = g.vars();
    bool open = false;
    for (auto& c : cases) {
      auto out = check_conjunction(c, g, vars);
      if (out.result == ConjResult::Refuted) return Verdict::invalid("fm", out.witness);
      if (out.result == ConjResult::Open) open = true;
    }
    if (!open) return Verdict::valid("fm");
    return Verdict::unknown("linear relaxation is satisfiable but no counterexample was found");
  } catch (const Unsupported&) {
    return Verdict::unknown("formula too large for case splitting");
  } catch (const FmLimit&) {
    return Verdict::unknown("Fourier-Motzkin constraint limit reached");
  }
}

Verdict smt_decide(const ArithGoal& g, const SmtConfig& cfg) {
  Formula negated = make_and(conjunction(g.antecedent), make_not(disjunction(g.succedent)));
  VarSet vars = g.vars();
  SmtAnswer ans = run_smt(cfg, negated, vars);
  switch (ans.status) {
    case SmtStatus::Unsat: return Verdict::valid("smt");
    case SmtStatus::Sat:
      if (ans.model && !goal_holds(g, *ans.model)) return Verdict::invalid("smt", *ans.model);
      return Verdict::unknown(ans.reason.empty() ? "solver model does not falsify the goal" : ans.reason);
    case SmtStatus::Unknown: return Verdict::unknown(ans.reason);
  }
  return Verdict::unknown("unreachable");
}

Verdict decide(const ArithGoal& g, const ArithPolicy& policy) {
  if (g.vars().empty()) {
    Verdict v = ground_decide(g);
    if (v.kind != VerdictKind::Unknown) return v;
  }
  if (Verdict v = poly_decide(g); v.kind != VerdictKind::Unknown) return v;
  Verdict fm = fm_decide(g);
  if (fm.kind != VerdictKind::Unknown) return fm;
  if (policy.smt.enabled()) {
    Verdict v = smt_decide(g, policy.smt);
    if (v.kind != VerdictKind::Unknown) return v;
    return Verdict::unknown(fm.reason + "; smt: " + v.reason);
  }
  return fm;
}

}  // namespace dl
