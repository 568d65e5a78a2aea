#include "dl/semantics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace dl {

template <>
Rational from_rational<Rational>(const Rational& r) {
  return r;
}

template <>
double from_rational<double>(const Rational& r) {
  return r.get_d();
}

namespace {

template <class Num>
Num num_pow(const Num& base, unsigned n) {
  if constexpr (std::is_same_v<Num, Rational>) {
    return pow(base, n);
  } else {
    Num out = 1;
    for (unsigned i = 0; i < n; ++i) out *= base;
    return out;
  }
}

template <class Num>
bool compare(FormulaKind k, const Num& a, const Num& b) {
  switch (k) {
    case FormulaKind::Eq: return a == b;
    case FormulaKind::Neq: return a != b;
    case FormulaKind::Geq: return a >= b;
    case FormulaKind::Gt: return a > b;
    case FormulaKind::Leq: return a <= b;
    case FormulaKind::Lt: return a < b;
    default: throw std::logic_error("not a comparison");
  }
}

template <class Num>
bool eval_formula(const State<Num>& s, const Formula& f, const EnumBudget* b) {
  switch (f->kind) {
    case FormulaKind::True: return true;
    case FormulaKind::False: return false;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      return compare<Num>(f->kind, eval_term(s, f->lhs), eval_term(s, f->rhs));
    case FormulaKind::Not: return !eval_formula(s, f->left, b);
    case FormulaKind::And: return eval_formula(s, f->left, b) && eval_formula(s, f->right, b);
    case FormulaKind::Or: return eval_formula(s, f->left, b) || eval_formula(s, f->right, b);
    case FormulaKind::Imply: return !eval_formula(s, f->left, b) || eval_formula(s, f->right, b);
    case FormulaKind::Equiv: return eval_formula(s, f->left, b) == eval_formula(s, f->right, b);
    case FormulaKind::Forall: case FormulaKind::Exists:
      throw NotQuantifierFree("quantified formula '" + to_string(f) + "' cannot be evaluated");
    case FormulaKind::Box: case FormulaKind::Diamond: {
      if (!b) throw NotQuantifierFree("modal formula '" + to_string(f) + "' needs an evaluation budget");
      auto states = reachable_states(f->program, s, *b);
      if (f->kind == FormulaKind::Box)
        return std::all_of(states.begin(), states.end(),
                           [&](const State<Num>& m) { return eval_formula(m, f->left, b); });
      return std::any_of(states.begin(), states.end(),
                         [&](const State<Num>& m) { return eval_formula(m, f->left, b); });
    }
  }
  throw std::logic_error("unreachable");
}

template <class Num>
State<Num> with_primes(State<Num> s, const Program& ode) {
  std::vector<std::pair<VarName, Num>> rates;
  for (const auto& eq : ode->equations) rates.emplace_back(eq.var.prime(), eval_term(s, eq.rhs));
  for (auto& [k, v] : rates) s[k] = v;
  return s;
}

template <class Num>
State<Num> closed_form_at(const State<Num>& s, const Program& ode, const Num& tau) {
  if (!ode->solution) throw MissingSolution("ODE '" + to_string(ode) + "' has no @solution annotation");
  State<Num> ctx = s;
  ctx[ode->solution->time] = tau;
  State<Num> out = s;
  for (const auto& eq : ode->equations) {
    const Term* y = ode->solution->find(eq.var);
    if (!y) throw MissingSolution("no solution given for '" + eq.var.key() + "'");
    out[eq.var] = eval_term(ctx, *y);
  }
  return out;
}

template <class Num>
State<Num> rk4_step(const State<Num>& s, const Program& ode, const Num& h) {
  const auto& eqs = ode->equations;
  auto rates = [&](const State<Num>& at) {
    std::vector<Num> k;
    k.reserve(eqs.size());
    for (const auto& eq : eqs) k.push_back(eval_term(at, eq.rhs));
    return k;
  };
  auto shifted = [&](const std::vector<Num>& k, const Num& factor) {
    State<Num> out = s;
    for (size_t i = 0; i < eqs.size(); ++i) out[eqs[i].var] = s.at(eqs[i].var) + factor * k[i];
    return out;
  };
  Num half = h / Num(2);
  auto k1 = rates(s);
  auto k2 = rates(shifted(k1, half));
  auto k3 = rates(shifted(k2, half));
  auto k4 = rates(shifted(k3, h));
  State<Num> out = s;
  for (size_t i = 0; i < eqs.size(); ++i)
    out[eqs[i].var] = s.at(eqs[i].var) + h / Num(6) * (k1[i] + Num(2) * k2[i] + Num(2) * k3[i] + k4[i]);
  return out;
}

template <class Num>
bool finished(const Num& t, const Num& duration, const Num& step) {
  if constexpr (std::is_same_v<Num, double>) return duration - t <= step * 1e-9;
  else return t >= duration;
}

}  // namespace

template <class Num>
Num eval_term(const State<Num>& s, const Term& t) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = s.find(t->var);
      if (it == s.end()) throw MissingVariable(t->var.key());
      return it->second;
    }
    case TermKind::Lit: return from_rational<Num>(t->value);
    case TermKind::Neg: return -eval_term(s, t->left);
    case TermKind::Plus: return eval_term(s, t->left) + eval_term(s, t->right);
    case TermKind::Minus: return eval_term(s, t->left) - eval_term(s, t->right);
    case TermKind::Times: return eval_term(s, t->left) * eval_term(s, t->right);
    case TermKind::Pow: return num_pow<Num>(eval_term(s, t->left), t->exponent);
  }
  throw std::logic_error("unreachable");
}

template <class Num>
bool holds_qf(const State<Num>& s, const Formula& f) {
  return eval_formula<Num>(s, f, nullptr);
}

template <class Num>
bool holds(const State<Num>& s, const Formula& f, const EnumBudget& b) {
  return eval_formula<Num>(s, f, &b);
}

template <class Num>
State<Num> unprimed(const State<Num>& s) {
  State<Num> out;
  for (const auto& [k, v] : s)
    if (!k.primed) out.emplace(k, v);
  return out;
}

template <class Num>
OdeRun<Num> integrate_ode(const State<Num>& s, const Program& ode, const Num& duration, OdeMode mode,
                          const Num& step) {
  if (ode->kind != ProgramKind::Ode) throw std::invalid_argument("integrate_ode needs an ODE");
  if (duration < Num(0)) throw std::invalid_argument("negative duration");
  if (!(step > Num(0))) throw std::invalid_argument("step must be positive");
  OdeRun<Num> run;
  State<Num> first = with_primes(s, ode);
  if (!holds_qf(first, ode->formula)) {
    run.violation = Num(0);
    return run;
  }
  run.trace.samples.emplace_back(Num(0), first);
  State<Num> cur = s;
  Num t(0);
  while (!finished(t, duration, step)) {
    Num h = std::min(step, Num(duration - t));
    cur = mode == OdeMode::ClosedForm ? closed_form_at(s, ode, Num(t + h)) : rk4_step(cur, ode, h);
    t += h;
    State<Num> sample = with_primes(cur, ode);
    if (!holds_qf(sample, ode->formula)) {
      run.violation = t;
      return run;
    }
    run.trace.samples.emplace_back(t, std::move(sample));
  }
  return run;
}

namespace {

template <class Num>
void check_cap(const std::set<State<Num>>& states, const EnumBudget& b) {
  if (states.size() > b.state_cap)
    throw BudgetExceeded("more than " + std::to_string(b.state_cap) + " reachable states");
}

template <class Num>
std::set<State<Num>> ode_stops(const Program& ode, const State<Num>& s, const EnumBudget& b) {
  std::set<State<Num>> out;
  if (!holds_qf(with_primes(s, ode), ode->formula)) return out;
  std::vector<Rational> grid = b.time_grid;
  std::sort(grid.begin(), grid.end());
  for (const auto& tau_r : grid) {
    Num tau = from_rational<Num>(tau_r);
    State<Num> at;
    if (b.ode_mode == OdeMode::ClosedForm) {
      at = closed_form_at(s, ode, tau);
      if (!holds_qf(with_primes(at, ode), ode->formula)) break;
    } else {
      auto run = integrate_ode(s, ode, tau, OdeMode::Rk4, from_rational<Num>(b.rk4_step));
      if (run.violation) break;
      at = run.final_state();
    }
    out.insert(unprimed(at));
  }
  return out;
}

}  // namespace

template <class Num>
std::set<State<Num>> reachable_states(const Program& p, const State<Num>& s, const EnumBudget& b) {
  std::set<State<Num>> out;
  switch (p->kind) {
    case ProgramKind::Assign: {
      State<Num> next = s;
      next[p->var] = eval_term(s, p->term);
      out.insert(std::move(next));
      break;
    }
    case ProgramKind::Test:
      if (holds(s, p->formula, b)) out.insert(s);
      break;
    case ProgramKind::Ode:
      out = ode_stops(p, s, b);
      break;
    case ProgramKind::Choice: {
      out = reachable_states(p->left, s, b);
      auto right = reachable_states(p->right, s, b);
      out.insert(right.begin(), right.end());
      break;
    }
    case ProgramKind::Seq:
      for (const auto& mid : reachable_states(p->left, s, b)) {
        auto tail = reachable_states(p->right, mid, b);
        out.insert(tail.begin(), tail.end());
        check_cap(out, b);
      }
      break;
    case ProgramKind::Loop: {
      out.insert(s);
      std::set<State<Num>> frontier{s};
      unsigned bound = b.bound_for(p.get());
      for (unsigned i = 0; i < bound && !frontier.empty(); ++i) {
        std::set<State<Num>> next;
        for (const auto& m : frontier) {
          auto step = reachable_states(p->left, m, b);
          for (auto& n : step)
            if (!out.count(n)) next.insert(n);
        }
        out.insert(next.begin(), next.end());
        check_cap(out, b);
        frontier = std::move(next);
      }
      break;
    }
  }
  check_cap(out, b);
  return out;
}

template <class Num>
bool check_box(const Program& p, const State<Num>& s, const Formula& post, const EnumBudget& b) {
  for (const auto& m : reachable_states(p, s, b))
    if (!holds(m, post, b)) return false;
  return true;
}

template <class Num>
bool check_diamond(const Program& p, const State<Num>& s, const Formula& post, const EnumBudget& b) {
  for (const auto& m : reachable_states(p, s, b))
    if (holds(m, post, b)) return true;
  return false;
}

// ------------------------------------------------------------ simulation

namespace {

template <class Num>
struct Sim {
  const SimOptions& opt;
  Trace<Num>& trace;
  Num now;

  std::optional<State<Num>> run(const Program& p, const State<Num>& s) {
    switch (p->kind) {
      case ProgramKind::Assign: {
        State<Num> next = s;
        next[p->var] = eval_term(s, p->term);
        trace.samples.emplace_back(now, next);
        return next;
      }
      case ProgramKind::Test:
        if (holds_qf(s, p->formula)) return s;
        return std::nullopt;
      case ProgramKind::Ode: {
        auto ode_run = integrate_ode(s, p, from_rational<Num>(opt.duration), opt.mode, from_rational<Num>(opt.step));
        if (ode_run.trace.samples.empty()) {
          trace.events.emplace_back(now, "domain violated at start of " + to_string(p));
          return std::nullopt;
        }
        for (size_t i = 1; i < ode_run.trace.samples.size(); ++i)
          trace.samples.emplace_back(now + ode_run.trace.samples[i].first, unprimed(ode_run.trace.samples[i].second));
        if (ode_run.violation)
          trace.events.emplace_back(now + ode_run.trace.samples.back().first, "domain boundary");
        now += ode_run.trace.samples.back().first;
        return unprimed(ode_run.final_state());
      }
      case ProgramKind::Choice: {
        size_t mark = trace.samples.size(), emark = trace.events.size();
        Num saved = now;
        if (auto left = run(p->left, s)) return left;
        trace.samples.resize(mark);
        trace.events.resize(emark);
        now = saved;
        return run(p->right, s);
      }
      case ProgramKind::Seq: {
        auto mid = run(p->left, s);
        if (!mid) return std::nullopt;
        return run(p->right, *mid);
      }
      case ProgramKind::Loop: {
        State<Num> cur = s;
        for (unsigned i = 0; i < opt.iterations; ++i) {
          auto next = run(p->left, cur);
          if (!next) {
            trace.events.emplace_back(now, "loop body blocked after " + std::to_string(i) + " iterations");
            break;
          }
          cur = *next;
        }
        return cur;
      }
    }
    return std::nullopt;
  }
};

}  // namespace

template <class Num>
Trace<Num> simulate(const Program& p, const State<Num>& s, const SimOptions& opt) {
  Trace<Num> trace;
  trace.samples.emplace_back(Num(0), s);
  Sim<Num> sim{opt, trace, Num(0)};
  if (!sim.run(p, s)) trace.events.emplace_back(sim.now, "run blocked");
  return trace;
}

std::string format_number(const Rational& r) { return to_decimal(r, 12); }

std::string format_number(double d) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, d);
  return std::string(buf, res.ptr);
}

template <class Num>
void write_trace_csv(std::ostream& os, const Trace<Num>& trace) {
  VarSet columns;
  for (const auto& [t, s] : trace.samples)
    for (const auto& [k, v] : s) columns.insert(k);
  os << 't';
  for (const auto& c : columns) os << ',' << c.key();
  os << '\n';
  for (const auto& [t, s] : trace.samples) {
    os << format_number(t);
    for (const auto& c : columns) {
      os << ',';
      auto it = s.find(c);
      if (it != s.end()) os << format_number(it->second);
    }
    os << '\n';
  }
  for (const auto& [t, tag] : trace.events) os << "# t=" << format_number(t) << ' ' << tag << '\n';
}

#define DL_INSTANTIATE(Num)                                                                               \
  template Num eval_term<Num>(const State<Num>&, const Term&);                                           \
  template bool holds_qf<Num>(const State<Num>&, const Formula&);                                        \
  template bool holds<Num>(const State<Num>&, const Formula&, const EnumBudget&);                        \
  template OdeRun<Num> integrate_ode<Num>(const State<Num>&, const Program&, const Num&, OdeMode,       \
                                          const Num&);                                                   \
  template std::set<State<Num>> reachable_states<Num>(const Program&, const State<Num>&,               \
                                                      const EnumBudget&);                                \
  template bool check_box<Num>(const Program&, const State<Num>&, const Formula&, const EnumBudget&);   \
  template bool check_diamond<Num>(const Program&, const State<Num>&, const Formula&, const EnumBudget&); \
  template Trace<Num> simulate<Num>(const Program&, const State<Num>&, const SimOptions&);              \
  template void write_trace_csv<Num>(std::ostream&, const Trace<Num>&);                                 \
  template State<Num> unprimed<Num>(const State<Num>&);

DL_INSTANTIATE(Rational)
DL_INSTANTIATE(double)

}  // namespace dl
