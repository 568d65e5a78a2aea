#include "dl/fuzz.hpp"

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <stdexcept>

namespace dl {

const std::vector<std::string>& axiom_names() {
  static const std::vector<std::string> names{"[:=]", "[?]", "[++]", "[;]", "[*]", "K",
                                              "I",    "V",   "G",    "M",   "<>"};
  return names;
}

const std::vector<std::string>& mutant_names() {
  static const std::vector<std::string> names{"[;]-swapped", "[++]-or", "V-unchecked"};
  return names;
}

const std::vector<VarName>& fuzz_vars() {
  static const std::vector<VarName> vars{VarName{"x"}, VarName{"y"}, VarName{"z"}};
  return vars;
}

Rational FuzzGen::rational() {
  int num = std::uniform_int_distribution<int>(-10, 10)(rng_);
  int den = std::uniform_int_distribution<int>(1, 10)(rng_);
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Term FuzzGen::term(int depth, const std::vector<VarName>& pool) {
  if (depth <= 0 || pick(3) == 0) {
    if (!pool.empty() && pick(3) != 0) return make_var(pool[pick(static_cast<int>(pool.size()))]);
    return make_lit(pick(2) ? Rational(pick(7) - 3) : rational());
  }
  switch (pick(5)) {
    case 0: return make_plus(term(depth - 1, pool), term(depth - 1, pool));
    case 1: return make_minus(term(depth - 1, pool), term(depth - 1, pool));
    case 2: return make_times(term(depth - 1, pool), term(depth - 1, pool));
    case 3: return make_neg(term(depth - 1, pool));
    default: return make_pow(term(depth - 1, pool), 2);
  }
}

Formula FuzzGen::formula(int depth, const std::vector<VarName>& pool) {
  if (depth <= 0 || pick(2) == 0) {
    static const FormulaKind cmps[] = {FormulaKind::Eq,  FormulaKind::Neq, FormulaKind::Geq,
                                       FormulaKind::Gt,  FormulaKind::Leq, FormulaKind::Lt};
    return make_cmp(cmps[pick(6)], term(1, pool), term(1, pool));
  }
  switch (pick(3)) {
    case 0: return make_and(formula(depth - 1, pool), formula(depth - 1, pool));
    case 1: return make_or(formula(depth - 1, pool), formula(depth - 1, pool));
    default: return make_not(formula(depth - 1, pool));
  }
}

Program FuzzGen::ode() {
  const auto& vars = fuzz_vars();
  int i = pick(3);
  VarName v = vars[i], w = vars[(i + 1 + pick(2)) % 3];
  VarName t{"t"};
  Term tt = make_var(t);
  std::vector<OdeEquation> eqs;
  SolutionAnnotation sol{t, {}};
  switch (pick(3)) {
    case 0: {
      Term c = make_lit(Rational(pick(7) - 3));
      eqs.push_back({v, c});
      sol.solutions.emplace_back(v, make_plus(make_var(v), make_times(c, tt)));
      break;
    }
    case 1:
      eqs.push_back({v, make_var(w)});
      sol.solutions.emplace_back(v, make_plus(make_var(v), make_times(make_var(w), tt)));
      break;
    default: {
      Rational c(pick(7) - 3);
      eqs.push_back({v, make_var(w)});
      eqs.push_back({w, make_lit(c)});
      sol.solutions.emplace_back(
          v, make_plus(make_plus(make_var(v), make_times(make_var(w), tt)),
                       make_times(make_lit(Rational(c / 2)), make_pow(tt, 2))));
      sol.solutions.emplace_back(w, make_plus(make_var(w), make_times(make_lit(c), tt)));
      break;
    }
  }
  Formula domain = make_true();
  if (pick(2)) {
    FormulaKind k = pick(2) ? FormulaKind::Geq : FormulaKind::Leq;
    domain = make_cmp(k, make_var(v), make_lit(Rational(pick(9) - 4)));
  }
  return make_ode(std::move(eqs), domain, std::move(sol));
}

Program FuzzGen::program(int depth) {
  const auto& vars = fuzz_vars();
  if (depth <= 1 || pick(3) == 0) {
    switch (pick(10)) {
      case 0: case 1: case 2: case 3:
        return make_assign(vars[pick(3)], term(2, vars));
      case 4: case 5: case 6:
        return make_test(formula(1, vars));
      default:
        return ode();
    }
  }
  switch (pick(5)) {
    case 0: case 1: return make_choice(program(depth - 1), program(depth - 1));
    case 2: case 3: return make_seq(program(depth - 1), program(depth - 1));
    default: return make_loop(program(depth - 1));
  }
}

ExactState FuzzGen::state() {
  ExactState s;
  for (const auto& v : fuzz_vars()) s[v] = rational();
  return s;
}

namespace {

constexpr int kProgramDepth = 4;

EnumBudget fuzz_budget() {
  EnumBudget b;
  b.loop_bound = 2;
  b.time_grid = {Rational(0), Rational(1, 2), Rational(1)};
  b.ode_mode = OdeMode::ClosedForm;
  b.state_cap = 20000;
  return b;
}

std::vector<VarName> unbound_vars(const Program& a) {
  VarSet bound = bound_vars(a);
  std::vector<VarName> out;
  for (const auto& v : fuzz_vars())
    if (!bound.count(v)) out.push_back(v);
  return out;
}

}  // namespace

FuzzInstance make_instance(const std::string& axiom, uint64_t case_seed) {
  FuzzGen g(case_seed);
  const auto& vars = fuzz_vars();
  FuzzInstance inst;
  inst.axiom = axiom;
  inst.budget = fuzz_budget();
  Program a = g.program(kProgramDepth);
  Program b = g.program(kProgramDepth - 1);
  Formula P = g.formula(2, vars);
  Formula Q = g.formula(2, vars);

  if (axiom == "[:=]") {
    VarName x = vars[g.pick(3)];
    Term e = g.term(2, vars);
    inst.lhs = make_box(make_assign(x, e), P);
    inst.rhs = substitute(P, x, e);
  } else if (axiom == "[?]") {
    inst.lhs = make_box(make_test(Q), P);
    inst.rhs = make_imply(Q, P);
  } else if (axiom == "[++]") {
    inst.lhs = make_box(make_choice(a, b), P);
    inst.rhs = make_and(make_box(a, P), make_box(b, P));
  } else if (axiom == "[;]") {
    inst.lhs = make_box(make_seq(a, b), P);
    inst.rhs = make_box(a, make_box(b, P));
  } else if (axiom == "[*]") {
    Program outer = make_loop(a), inner = make_loop(a);
    inst.lhs = make_box(outer, P);
    inst.rhs = make_and(P, make_box(a, make_box(inner, P)));
    inst.budget.loop_bound_override[inner.get()] = inst.budget.loop_bound - 1;
  } else if (axiom == "K") {
    inst.lhs = make_box(a, make_imply(P, Q));
    inst.rhs = make_imply(make_box(a, P), make_box(a, Q));
    inst.implication = true;
  } else if (axiom == "I") {
    Program outer = make_loop(a), inner = make_loop(a);
    inst.lhs = make_box(outer, P);
    inst.rhs = make_and(P, make_box(inner, make_imply(P, make_box(a, P))));
    inst.budget.loop_bound_override[inner.get()] = inst.budget.loop_bound - 1;
  } else if (axiom == "V") {
    Formula p = g.formula(2, unbound_vars(a));
    inst.lhs = p;
    inst.rhs = make_box(a, p);
    inst.implication = true;
  } else if (axiom == "G") {
    Formula taut = make_or(Q, make_not(Q));
    inst.lhs = taut;
    inst.rhs = make_box(a, taut);
    inst.implication = true;
  } else if (axiom == "M") {
    inst.lhs = make_box(a, make_and(P, Q));
    inst.rhs = make_box(a, P);
    inst.implication = true;
  } else if (axiom == "<>") {
    inst.lhs = make_diamond(a, P);
    inst.rhs = make_not(make_box(a, make_not(P)));
  } else if (axiom == "[;]-swapped") {
    inst.lhs = make_box(make_seq(a, b), P);
    inst.rhs = make_box(b, make_box(a, P));
  } else if (axiom == "[++]-or") {
    inst.lhs = make_box(make_choice(a, b), P);
    inst.rhs = make_or(make_box(a, P), make_box(b, P));
  } else if (axiom == "V-unchecked") {
    inst.lhs = P;
    inst.rhs = make_box(a, P);
    inst.implication = true;
  } else {
    throw std::invalid_argument("unknown axiom '" + axiom + "'");
  }
  inst.state = g.state();
  return inst;
}

std::optional<Counterexample> check_instance(const FuzzInstance& inst, size_t index) {
  bool l = holds(inst.state, inst.lhs, inst.budget);
  bool r = holds(inst.state, inst.rhs, inst.budget);
  bool ok = inst.implication ? (!l || r) : (l == r);
  if (ok) return std::nullopt;
  return Counterexample{index, inst.state, to_string(inst.formula())};
}

namespace {

// Returns true when the case was skipped for exceeding the budget.
bool run_case(const std::string& axiom, uint64_t seed, size_t i, std::optional<Counterexample>& out) {
  try {
    out = check_instance(make_instance(axiom, seed + i), i);
    return false;
  } catch (const BudgetExceeded&) {
    return true;
  }
}

}  // namespace

FuzzReport axiom_fuzz_serial(const std::string& axiom, size_t n_cases, uint64_t seed) {
  FuzzReport rep{axiom, 0, 0, std::nullopt};
  for (size_t i = 0; i < n_cases; ++i) {
    std::optional<Counterexample> cex;
    ++rep.cases;
    if (run_case(axiom, seed, i, cex)) ++rep.skipped;
    if (cex) {
      rep.counterexample = std::move(cex);
      break;
    }
  }
  return rep;
}

FuzzReport axiom_fuzz(const std::string& axiom, size_t n_cases, uint64_t seed) {
  std::vector<std::optional<Counterexample>> found(n_cases);
  std::vector<char> skipped(n_cases, 0);
  std::atomic<size_t> first{n_cases};
  const long long n = static_cast<long long>(n_cases);

#pragma omp parallel for schedule(dynamic, 4)
  for (long long i = 0; i < n; ++i) {
    size_t idx = static_cast<size_t>(i);
    if (idx > first.load(std::memory_order_relaxed)) continue;
    skipped[idx] = run_case(axiom, seed, idx, found[idx]);
    if (found[idx]) {
      size_t cur = first.load();
      while (idx < cur && !first.compare_exchange_weak(cur, idx)) {
      }
    }
  }

  FuzzReport rep{axiom, 0, 0, std::nullopt};
  size_t stop = first.load();
  rep.cases = stop < n_cases ? stop + 1 : n_cases;
  for (size_t i = 0; i < rep.cases; ++i) rep.skipped += skipped[i];
  if (stop < n_cases) rep.counterexample = found[stop];
  return rep;
}

}  // namespace dl
