#include "dl/modelplex.hpp"

#include <atomic>
#include <limits>
#include <sstream>

#include "dl/polynomial.hpp"

namespace dl {

VarName post_var(const VarName& x) { return VarName{x.base + "_post"}; }

namespace {

Term zero() { return make_lit(Rational(0)); }

bool entails(const std::vector<Formula>& assumptions, const Formula& goal) {
  ArithGoal g{assumptions, {goal}};
  return decide(g, ArithPolicy{}).kind == VerdictKind::Valid;
}

// +1 or -1 when the sign of `a` follows from the assumptions, 0 otherwise.
int known_sign(const Polynomial& a, const std::vector<Formula>& assumptions) {
  if (a.is_constant()) return sgn(a.constant_term());
  Term t = a.to_term();
  if (entails(assumptions, make_cmp(FormulaKind::Gt, t, zero()))) return 1;
  if (entails(assumptions, make_cmp(FormulaKind::Lt, t, zero()))) return -1;
  return 0;
}

Formula apply_update(const Formula& f, const TermSubst& u) { return simplify(substitute(f, u)); }

// Endpoint checks are exact only when each constrained quantity is concave
// (for >=, >) or convex (for <=, <) along the flow.
void check_concavity(const Formula& domain, const TermSubst& flow, const VarName& t, SymContext& ctx) {
  for (const auto& atom : conjuncts(domain)) {
    if (!is_comparison(atom->kind) || atom->kind == FormulaKind::Eq || atom->kind == FormulaKind::Neq) continue;
    Polynomial p = poly_normalize(substitute(make_minus(atom->lhs, atom->rhs), flow));
    Polynomial d2 = p.derivative(t.key()).derivative(t.key());
    bool lower = atom->kind == FormulaKind::Geq || atom->kind == FormulaKind::Gt;
    bool ok = !d2.variables().count(t.key()) &&
              (d2.is_zero() || entails(ctx.assumptions, make_cmp(lower ? FormulaKind::Leq : FormulaKind::Geq,
                                                                 d2.to_term(), zero())));
    if (!ok)
      ctx.warnings.push_back("domain constraint '" + to_string(atom) +
                             "' is only checked at the endpoints and may be violated in between");
  }
}

std::vector<SymState> exec_ode(const Program& ode, const SymState& from, SymContext& ctx) {
  if (!ode->solution) throw MissingSolution("ODE '" + to_string(ode) + "' has no @solution annotation");
  const SolutionAnnotation& sol = *ode->solution;
  VarName t = fresh_var(sol.time.base, ctx.taken);
  ctx.taken.insert(t);

  TermSubst flow;  // ODE variable -> solution in terms of its start value
  for (const auto& eq : ode->equations) {
    const Term* y = sol.find(eq.var);
    if (!y) throw MissingSolution("no solution for '" + eq.var.base + "'");
    flow[eq.var] = substitute(*y, sol.time, make_var(t));
  }
  check_concavity(ode->formula, flow, t, ctx);

  SymState out = from;
  for (const auto& [x, y] : flow) out.update[x] = simplify(substitute(y, from.update));
  out.path.push_back(make_cmp(FormulaKind::Geq, make_var(t), zero()));
  for (const auto& c : conjuncts(apply_update(ode->formula, from.update))) out.path.push_back(c);
  for (const auto& c : conjuncts(apply_update(ode->formula, out.update))) out.path.push_back(c);
  out.times.push_back(t);
  return {out};
}

// ------------------------------------------------------ time elimination

struct Elimination {
  Polynomial a, b;  // a*t + b = 0
  int sign = 0;
};

std::optional<Elimination> linear_in(const Formula& f, const VarName& t, const std::vector<Formula>& assumptions,
                                     bool& saw_linear) {
  if (f->kind != FormulaKind::Eq) return std::nullopt;
  Polynomial p = poly_normalize(f->lhs) - poly_normalize(f->rhs);
  auto cs = p.coefficients_in(t.key());
  if (cs.empty() || cs.rbegin()->first != 1) return std::nullopt;
  saw_linear = true;
  Elimination e{cs[1], cs.count(0) ? cs[0] : Polynomial()};
  e.sign = known_sign(e.a, assumptions);
  if (e.sign == 0) return std::nullopt;
  return e;
}

Polynomial eliminate_in(const Polynomial& p, const VarName& t, const Elimination& e) {
  auto cs = p.coefficients_in(t.key());
  if (cs.empty() || cs.rbegin()->first == 0) return p;
  if (e.a.is_constant()) return p.substitute(t.key(), (-e.b).scaled(Rational(1 / e.a.constant_term())));
  unsigned d = cs.rbegin()->first;
  Polynomial out;
  for (const auto& [k, c] : cs) out += c * (-e.b).pow(k) * e.a.pow(d - k);
  // multiplied by a^d; flip back to a positive factor when needed
  return e.sign < 0 && d % 2 == 1 ? -out : out;
}

// Scales by a positive rational so the coefficients are coprime integers.
Polynomial primitive(const Polynomial& p) {
  mpz_class l = 1, g = 0;
  for (const auto& [m, c] : p.terms()) l = lcm(l, c.get_den());
  for (const auto& [m, c] : p.terms()) g = gcd(g, mpz_class(c.get_num() * (l / c.get_den())));
  if (g == 0) return p;
  return p.scaled(Rational(l, g));
}

Formula eliminate_formula(const Formula& f, const VarName& t, const Elimination& e) {
  if (!free_vars(f).count(t)) return f;
  if (is_comparison(f->kind)) {
    Polynomial p = poly_normalize(f->lhs) - poly_normalize(f->rhs);
    Polynomial q = primitive(eliminate_in(p, t, e));
    if (q.is_constant()) {
      ExactState none;
      return holds_qf(none, make_cmp(f->kind, make_lit(q.constant_term()), zero())) ? make_true() : make_false();
    }
    return make_cmp(f->kind, q.to_term(), zero());
  }
  switch (f->kind) {
    case FormulaKind::Not: return make_not(eliminate_formula(f->left, t, e));
    case FormulaKind::And: return make_and(eliminate_formula(f->left, t, e), eliminate_formula(f->right, t, e));
    case FormulaKind::Or: return make_or(eliminate_formula(f->left, t, e), eliminate_formula(f->right, t, e));
    case FormulaKind::Imply: return make_imply(eliminate_formula(f->left, t, e), eliminate_formula(f->right, t, e));
    case FormulaKind::Equiv: return make_equiv(eliminate_formula(f->left, t, e), eliminate_formula(f->right, t, e));
    default: throw SynthesisError("NotLinearInTime", "cannot eliminate time from '" + to_string(f) + "'");
  }
}

bool contains(const std::vector<Formula>& fs, const Formula& f) {
  for (const auto& g : fs)
    if (structural_eq(g, f)) return true;
  return false;
}

// Flattens, folds and deduplicates a conjunct list. Returns nullopt when a
// conjunct is false.
std::optional<std::vector<Formula>> tidy(const std::vector<Formula>& in) {
  std::vector<Formula> out;
  for (const auto& f : in)
    for (const auto& c : conjuncts(simplify(f))) {
      if (c->kind == FormulaKind::True) continue;
      if (c->kind == FormulaKind::False) return std::nullopt;
      if (!contains(out, c)) out.push_back(c);
    }
  return out;
}

Formula disjoin_paths(std::vector<std::vector<Formula>> paths) {
  if (paths.empty()) return make_false();
  // conjuncts shared by every path are factored out
  std::vector<Formula> common;
  for (const auto& c : paths[0]) {
    bool everywhere = true;
    for (size_t i = 1; i < paths.size() && everywhere; ++i) everywhere = contains(paths[i], c);
    if (everywhere && paths.size() > 1) common.push_back(c);
  }
  std::vector<Formula> alts;
  bool trivial = false;
  for (auto& p : paths) {
    std::vector<Formula> rest;
    for (auto& c : p)
      if (!contains(common, c)) rest.push_back(c);
    if (rest.empty()) trivial = true;
    alts.push_back(conjunction(rest));
  }
  std::vector<Formula> parts;
  if (!trivial) parts.push_back(disjunction(alts));
  parts.insert(parts.end(), common.begin(), common.end());
  return parts.empty() ? make_true() : conjunction(parts);
}

std::vector<Formula> relation(const SymState& s, const VarSet& state_vars) {
  std::vector<Formula> out = s.path;
  for (const auto& x : state_vars) {
    auto it = s.update.find(x);
    out.push_back(make_cmp(FormulaKind::Eq, make_var(post_var(x)), it == s.update.end() ? make_var(x) : it->second));
  }
  return out;
}

}  // namespace

// ----------------------------------------------------------------- symexec

std::vector<SymState> symexec(const Program& p, const SymState& from, SymContext& ctx) {
  switch (p->kind) {
    case ProgramKind::Assign: {
      SymState s = from;
      s.update[p->var] = simplify(substitute(p->term, from.update));
      return {s};
    }
    case ProgramKind::Test: {
      if (!is_quantifier_free(p->formula) || !is_program_free(p->formula))
        throw SynthesisError("NotQuantifierFree", "test '" + to_string(p->formula) + "'");
      SymState s = from;
      for (const auto& c : conjuncts(apply_update(p->formula, from.update))) s.path.push_back(c);
      return {s};
    }
    case ProgramKind::Choice: {
      auto out = symexec(p->left, from, ctx);
      auto right = symexec(p->right, from, ctx);
      out.insert(out.end(), right.begin(), right.end());
      return out;
    }
    case ProgramKind::Seq: {
      std::vector<SymState> out;
      for (const auto& mid : symexec(p->left, from, ctx)) {
        auto next = symexec(p->right, mid, ctx);
        out.insert(out.end(), next.begin(), next.end());
      }
      return out;
    }
    case ProgramKind::Ode: return exec_ode(p, from, ctx);
    case ProgramKind::Loop: throw SynthesisError("LoopNotSupported", "'" + to_string(p) + "'");
  }
  return {};
}

std::vector<SymState> symexec(const Program& p, SymContext& ctx) {
  VarSet av = all_vars(p);
  ctx.taken.insert(av.begin(), av.end());
  return symexec(p, SymState{}, ctx);
}

std::vector<Formula> eliminate_time(const std::vector<Formula>& conjuncts, const VarName& t,
                                    const std::vector<Formula>& assumptions) {
  bool saw_linear = false;
  std::optional<Elimination> e;
  for (const auto& f : conjuncts)
    if ((e = linear_in(f, t, assumptions, saw_linear))) break;
  if (!e) {
    if (saw_linear)
      throw SynthesisError("AmbiguousCoefficientSign",
                           "the sign of the coefficient of '" + t.key() + "' does not follow from the assumptions");
    throw SynthesisError("NotLinearInTime", "no equation is linear in '" + t.key() + "'");
  }
  std::vector<Formula> out;
  for (const auto& f : conjuncts) out.push_back(eliminate_formula(f, t, *e));
  return out;
}

Monitor synth_controller_monitor(const Program& ctrl, const VarSet& state_vars) {
  SymContext ctx;
  for (const auto& x : state_vars) ctx.taken.insert(post_var(x));
  std::vector<std::vector<Formula>> paths;
  for (const auto& s : symexec(ctrl, ctx)) {
    if (!s.times.empty()) throw SynthesisError("NotDiscrete", "controller contains an ODE");
    if (auto p = tidy(relation(s, state_vars))) paths.push_back(*p);
  }
  return Monitor{Monitor::Kind::Controller, disjoin_paths(std::move(paths)), std::move(ctx.warnings)};
}

Monitor synth_model_monitor(const Program& body, const VarSet& state_vars, const std::vector<Formula>& assumptions) {
  SymContext ctx;
  ctx.assumptions = assumptions;
  for (const auto& x : state_vars) ctx.taken.insert(post_var(x));
  std::vector<std::vector<Formula>> paths;
  for (const auto& s : symexec(body, ctx)) {
    std::vector<Formula> rel = relation(s, state_vars);
    for (const auto& t : s.times) rel = eliminate_time(rel, t, assumptions);
    if (auto p = tidy(rel)) paths.push_back(*p);
  }
  return Monitor{Monitor::Kind::Model, disjoin_paths(std::move(paths)), std::move(ctx.warnings)};
}

bool eval_monitor(const Formula& monitor, const ExactState& prior, const ExactState& post) {
  ExactState merged = prior;
  for (const auto& [k, v] : post) merged[k] = v;
  return holds_qf(merged, monitor);
}

LoopModel extract_loop_model(const ModelFile& m) {
  Formula f = specialize(m);
  if (f->kind != FormulaKind::Imply || f->right->kind != FormulaKind::Box ||
      f->right->program->kind != ProgramKind::Loop)
    throw SynthesisError("UnsupportedShape", "expected A -> [{plant; ctrl}*]B");
  LoopModel out;
  out.init = f->left;
  out.body = f->right->program->left;
  out.safety = f->right->left;
  if (out.body->kind != ProgramKind::Seq) throw SynthesisError("UnsupportedShape", "loop body is not plant; ctrl");
  out.plant = out.body->left;
  out.ctrl = out.body->right;
  for (const auto& x : bound_vars(out.body))
    if (!x.primed) out.state_vars.insert(x);
  VarSet consts = m.constant_names();
  for (const auto& c : conjuncts(out.init)) {
    bool only_consts = true;
    for (const auto& v : free_vars(c)) only_consts &= consts.count(v) > 0;
    if (only_consts) out.assumptions.push_back(c);
  }
  return out;
}

// ------------------------------------------------------------- equivalence

namespace {

struct Grid {
  std::vector<VarName> vars;
  std::vector<const std::vector<Rational>*> values;
  size_t size = 1;

  Grid(const Formula& a, const Formula& b, const GridSpec& spec) {
    VarSet vs = free_vars(a);
    for (const Formula& f : {b, spec.context})
      if (f) {
        VarSet fv = free_vars(f);
        vs.insert(fv.begin(), fv.end());
      }
    for (const auto& v : vs) {
      auto it = spec.values.find(v);
      if (it == spec.values.end()) throw MissingVariable(v.key());
      vars.push_back(v);
      values.push_back(&it->second);
      size *= it->second.size();
    }
  }

  ExactState point(size_t index) const {
    ExactState s;
    for (size_t i = vars.size(); i-- > 0;) {
      const auto& vals = *values[i];
      s[vars[i]] = vals[index % vals.size()];
      index /= vals.size();
    }
    return s;
  }
};

}  // namespace

EquivResult monitor_equiv_serial(const Formula& a, const Formula& b, const GridSpec& spec) {
  Grid grid(a, b, spec);
  EquivResult r;
  for (size_t i = 0; i < grid.size; ++i) {
    ExactState s = grid.point(i);
    if (spec.context && !holds_qf(s, spec.context)) continue;
    ++r.evaluated;
    if (r.equivalent && holds_qf(s, a) != holds_qf(s, b)) {
      r.equivalent = false;
      r.mismatch = s;
    }
  }
  return r;
}

EquivResult monitor_equiv(const Formula& a, const Formula& b, const GridSpec& spec) {
  Grid grid(a, b, spec);
  const long n = static_cast<long>(grid.size);
  size_t evaluated = 0;
  std::atomic<long> first{std::numeric_limits<long>::max()};
#pragma omp parallel for schedule(dynamic, 64) reduction(+ : evaluated)
  for (long i = 0; i < n; ++i) {
    ExactState s = grid.point(static_cast<size_t>(i));
    if (spec.context && !holds_qf(s, spec.context)) continue;
    ++evaluated;
    if (holds_qf(s, a) != holds_qf(s, b)) {
      long cur = first.load();
      while (i < cur && !first.compare_exchange_weak(cur, i)) {
      }
    }
  }
  EquivResult r;
  r.evaluated = evaluated;
  if (first.load() != std::numeric_limits<long>::max()) {
    r.equivalent = false;
    r.mismatch = grid.point(static_cast<size_t>(first.load()));
  }
  return r;
}

// ----------------------------------------------------------- compiled form

namespace {

void emit_term(const Term& t, std::vector<Op>& out) {
  switch (t->kind) {
    case TermKind::Var: out.push_back({OpCode::Load, t->var.key(), {}, 0}); return;
    case TermKind::Lit: out.push_back({OpCode::Const, "", t->value, 0}); return;
    case TermKind::Neg:
      out.push_back({OpCode::Const, "", Rational(0), 0});
      emit_term(t->left, out);
      out.push_back({OpCode::Sub, "", {}, 0});
      return;
    case TermKind::Pow:
      emit_term(t->left, out);
      out.push_back({OpCode::Pow, "", {}, t->exponent});
      return;
    default: break;
  }
  emit_term(t->left, out);
  emit_term(t->right, out);
  out.push_back({t->kind == TermKind::Plus ? OpCode::Add : t->kind == TermKind::Minus ? OpCode::Sub : OpCode::Mul, "",
                 {}, 0});
}

void emit_formula(const Formula& f, std::vector<Op>& out) {
  auto op = [&](OpCode c) { out.push_back({c, "", {}, 0}); };
  auto cmp = [&](const Term& a, const Term& b, OpCode c) {
    emit_term(a, out);
    emit_term(b, out);
    op(c);
  };
  switch (f->kind) {
    case FormulaKind::True: out.push_back({OpCode::Const, "", Rational(1), 0}); return;
    case FormulaKind::False: out.push_back({OpCode::Const, "", Rational(0), 0}); return;
    case FormulaKind::Eq: cmp(f->lhs, f->rhs, OpCode::Eq); return;
    case FormulaKind::Neq: cmp(f->lhs, f->rhs, OpCode::Eq); op(OpCode::Not); return;
    case FormulaKind::Geq: cmp(f->lhs, f->rhs, OpCode::Ge); return;
    case FormulaKind::Leq: cmp(f->rhs, f->lhs, OpCode::Ge); return;
    case FormulaKind::Gt: cmp(f->rhs, f->lhs, OpCode::Ge); op(OpCode::Not); return;
    case FormulaKind::Lt: cmp(f->lhs, f->rhs, OpCode::Ge); op(OpCode::Not); return;
    case FormulaKind::Not: emit_formula(f->left, out); op(OpCode::Not); return;
    case FormulaKind::And:
    case FormulaKind::Or:
      emit_formula(f->left, out);
      emit_formula(f->right, out);
      op(f->kind == FormulaKind::And ? OpCode::And : OpCode::Or);
      return;
    case FormulaKind::Imply:
      emit_formula(f->left, out);
      op(OpCode::Not);
      emit_formula(f->right, out);
      op(OpCode::Or);
      return;
    case FormulaKind::Equiv:
      emit_formula(f->left, out);
      emit_formula(f->right, out);
      op(OpCode::Eq);
      return;
    default: throw NotQuantifierFree("monitor '" + to_string(f) + "' is not quantifier- and program-free");
  }
}

const std::pair<OpCode, const char*> op_names[] = {
    {OpCode::Load, "LOAD"}, {OpCode::Const, "CONST"}, {OpCode::Add, "ADD"}, {OpCode::Sub, "SUB"},
    {OpCode::Mul, "MUL"},   {OpCode::Pow, "POW"},     {OpCode::Ge, "GE"},   {OpCode::Eq, "EQ"},
    {OpCode::And, "AND"},   {OpCode::Or, "OR"},       {OpCode::Not, "NOT"},
};

}  // namespace

std::vector<Op> compile_monitor(const Formula& f) {
  std::vector<Op> out;
  emit_formula(f, out);
  return out;
}

bool run_ops(const std::vector<Op>& ops, const ExactState& frame) {
  std::vector<Rational> stack;
  auto pop = [&] {
    if (stack.empty()) throw Error("monitor code: stack underflow");
    Rational v = stack.back();
    stack.pop_back();
    return v;
  };
  auto truth = [](bool b) { return Rational(b ? 1 : 0); };
  for (const Op& op : ops) {
    switch (op.code) {
      case OpCode::Load: {
        auto it = frame.find(var_from_key(op.var));
        if (it == frame.end()) throw MissingVariable(op.var);
        stack.push_back(it->second);
        break;
      }
      case OpCode::Const: stack.push_back(op.value); break;
      case OpCode::Pow: stack.push_back(pow(pop(), op.power)); break;
      case OpCode::Not: stack.push_back(truth(sgn(pop()) == 0)); break;
      default: {
        Rational b = pop(), a = pop();
        switch (op.code) {
          case OpCode::Add: stack.push_back(a + b); break;
          case OpCode::Sub: stack.push_back(a - b); break;
          case OpCode::Mul: stack.push_back(a * b); break;
          case OpCode::Ge: stack.push_back(truth(a >= b)); break;
          case OpCode::Eq: stack.push_back(truth(a == b)); break;
          case OpCode::And: stack.push_back(truth(sgn(a) != 0 && sgn(b) != 0)); break;
          case OpCode::Or: stack.push_back(truth(sgn(a) != 0 || sgn(b) != 0)); break;
          default: break;
        }
      }
    }
  }
  if (stack.size() != 1) throw Error("monitor code leaves " + std::to_string(stack.size()) + " values");
  return sgn(stack.back()) != 0;
}

std::string serialize_ops(const std::vector<Op>& ops) {
  std::ostringstream os;
  for (const Op& op : ops) {
    for (const auto& [code, name] : op_names)
      if (code == op.code) os << name;
    if (op.code == OpCode::Load) os << ' ' << op.var;
    if (op.code == OpCode::Const) os << ' ' << to_string(op.value);
    if (op.code == OpCode::Pow) os << ' ' << op.power;
    os << '\n';
  }
  return os.str();
}

std::vector<Op> parse_ops(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<Op> out;
  int lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    std::istringstream ls(line);
    std::string name, arg, extra;
    if (!(ls >> name)) continue;
    ls >> arg;
    if (ls >> extra) throw SyntaxError("trailing text '" + extra + "'", lineno, 1);
    std::optional<OpCode> code;
    for (const auto& [c, n] : op_names)
      if (name == n) code = c;
    if (!code) throw SyntaxError("unknown instruction '" + name + "'", lineno, 1);
    Op op{*code, "", {}, 0};
    bool wants_arg = op.code == OpCode::Load || op.code == OpCode::Const || op.code == OpCode::Pow;
    if (wants_arg == arg.empty()) throw SyntaxError(name + (wants_arg ? " needs an operand" : " takes no operand"), lineno, 1);
    if (op.code == OpCode::Load) {
      op.var = arg;
    } else if (op.code == OpCode::Const) {
      auto r = parse_rational(arg);
      if (!r) throw SyntaxError("bad constant '" + arg + "'", lineno, 1);
      op.value = *r;
    } else if (op.code == OpCode::Pow) {
      if (arg.find_first_not_of("0123456789") != std::string::npos)
        throw SyntaxError("bad exponent '" + arg + "'", lineno, 1);
      op.power = static_cast<unsigned>(std::stoul(arg));
    }
    out.push_back(std::move(op));
  }
  return out;
}

}  // namespace dl
