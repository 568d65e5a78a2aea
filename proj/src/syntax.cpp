#include "dl/syntax.hpp"

#include <cctype>
#include <functional>
#include <stdexcept>

namespace dl {

void check_identifier(const std::string& name) {
  bool ok = !name.empty() && std::isalpha(static_cast<unsigned char>(name[0]));
  for (char c : name)
    ok = ok && (std::isalnum(static_cast<unsigned char>(c)) || c == '_');
  if (!ok) throw std::invalid_argument("invalid identifier '" + name + "'");
}

VarName var_from_key(const std::string& key) {
  if (!key.empty() && key.back() == '\'') return {key.substr(0, key.size() - 1), true};
  return {key, false};
}

// ---------------------------------------------------------------- builders

Term make_var(const VarName& v) {
  return std::make_shared<const TermNode>(TermNode{TermKind::Var, v, {}, nullptr, nullptr, 0});
}

Term make_lit(const Rational& r) {
  if (sgn(r) < 0) return make_neg(make_lit(-r));
  Rational v = r;
  v.canonicalize();
  return std::make_shared<const TermNode>(TermNode{TermKind::Lit, {}, v, nullptr, nullptr, 0});
}

Term make_neg(Term t) {
  return std::make_shared<const TermNode>(TermNode{TermKind::Neg, {}, {}, std::move(t), nullptr, 0});
}

namespace {
Term binary(TermKind k, Term a, Term b) {
  return std::make_shared<const TermNode>(TermNode{k, {}, {}, std::move(a), std::move(b), 0});
}
}  // namespace

Term make_plus(Term a, Term b) { return binary(TermKind::Plus, std::move(a), std::move(b)); }
Term make_minus(Term a, Term b) { return binary(TermKind::Minus, std::move(a), std::move(b)); }
Term make_times(Term a, Term b) { return binary(TermKind::Times, std::move(a), std::move(b)); }

Term make_pow(Term base, unsigned exponent) {
  return std::make_shared<const TermNode>(
      TermNode{TermKind::Pow, {}, {}, std::move(base), nullptr, exponent});
}

namespace {
Formula formula_node(FormulaNode n) { return std::make_shared<const FormulaNode>(std::move(n)); }
}  // namespace

Formula make_true() {
  static const Formula t = formula_node({FormulaKind::True, {}, {}, {}, {}, {}, {}});
  return t;
}

Formula make_false() {
  static const Formula f = formula_node({FormulaKind::False, {}, {}, {}, {}, {}, {}});
  return f;
}

Formula make_cmp(FormulaKind kind, Term lhs, Term rhs) {
  if (!is_comparison(kind)) throw std::invalid_argument("make_cmp: not a comparison");
  return formula_node({kind, std::move(lhs), std::move(rhs), {}, {}, {}, {}});
}

Formula make_not(Formula f) { return formula_node({FormulaKind::Not, {}, {}, std::move(f), {}, {}, {}}); }
Formula make_and(Formula a, Formula b) {
  return formula_node({FormulaKind::And, {}, {}, std::move(a), std::move(b), {}, {}});
}
Formula make_or(Formula a, Formula b) {
  return formula_node({FormulaKind::Or, {}, {}, std::move(a), std::move(b), {}, {}});
}
Formula make_imply(Formula a, Formula b) {
  return formula_node({FormulaKind::Imply, {}, {}, std::move(a), std::move(b), {}, {}});
}
Formula make_equiv(Formula a, Formula b) {
  return formula_node({FormulaKind::Equiv, {}, {}, std::move(a), std::move(b), {}, {}});
}
Formula make_forall(const VarName& v, Formula body) {
  if (v.primed) throw std::invalid_argument("quantified variable must be unprimed");
  return formula_node({FormulaKind::Forall, {}, {}, std::move(body), {}, v, {}});
}
Formula make_exists(const VarName& v, Formula body) {
  if (v.primed) throw std::invalid_argument("quantified variable must be unprimed");
  return formula_node({FormulaKind::Exists, {}, {}, std::move(body), {}, v, {}});
}
Formula make_box(Program p, Formula post) {
  return formula_node({FormulaKind::Box, {}, {}, std::move(post), {}, {}, std::move(p)});
}
Formula make_diamond(Program p, Formula post) {
  return formula_node({FormulaKind::Diamond, {}, {}, std::move(post), {}, {}, std::move(p)});
}

Formula conjunction(const std::vector<Formula>& parts) {
  if (parts.empty()) return make_true();
  Formula out = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) out = make_and(*it, out);
  return out;
}

Formula disjunction(const std::vector<Formula>& parts) {
  if (parts.empty()) return make_false();
  Formula out = parts.back();
  for (auto it = parts.rbegin() + 1; it != parts.rend(); ++it) out = make_or(*it, out);
  return out;
}

namespace {
void flatten(const Formula& f, FormulaKind k, std::vector<Formula>& out) {
  if (f->kind == k) {
    flatten(f->left, k, out);
    flatten(f->right, k, out);
  } else {
    out.push_back(f);
  }
}
}  // namespace

std::vector<Formula> conjuncts(const Formula& f) {
  std::vector<Formula> out;
  flatten(f, FormulaKind::And, out);
  return out;
}

std::vector<Formula> disjuncts(const Formula& f) {
  std::vector<Formula> out;
  flatten(f, FormulaKind::Or, out);
  return out;
}

bool is_comparison(FormulaKind k) {
  switch (k) {
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      return true;
    default:
      return false;
  }
}

bool is_modal(FormulaKind k) { return k == FormulaKind::Box || k == FormulaKind::Diamond; }

const Term* SolutionAnnotation::find(const VarName& v) const {
  for (const auto& [x, t] : solutions)
    if (x == v) return &t;
  return nullptr;
}

namespace {
Program program_node(ProgramNode n) { return std::make_shared<const ProgramNode>(std::move(n)); }
}  // namespace

Program make_assign(const VarName& x, Term e) {
  ProgramNode n{ProgramKind::Assign, x, std::move(e), {}, {}, {}, {}, {}, {}};
  return program_node(std::move(n));
}

Program make_test(Formula q) {
  return program_node({ProgramKind::Test, {}, {}, std::move(q), {}, {}, {}, {}, {}});
}

Program make_ode(std::vector<OdeEquation> eqs, Formula domain, std::optional<SolutionAnnotation> solution) {
  VarSet seen;
  for (const auto& eq : eqs) {
    if (eq.var.primed) throw std::invalid_argument("ODE left-hand side must be unprimed");
    if (!seen.insert(eq.var).second)
      throw std::invalid_argument("duplicate ODE variable '" + eq.var.base + "'");
  }
  if (!domain) domain = make_true();
  return program_node({ProgramKind::Ode, {}, {}, std::move(domain), std::move(eqs), {}, {},
                       std::move(solution), {}});
}

Program make_choice(Program a, Program b) {
  return program_node({ProgramKind::Choice, {}, {}, {}, {}, std::move(a), std::move(b), {}, {}});
}

Program make_seq(Program a, Program b) {
  return program_node({ProgramKind::Seq, {}, {}, {}, {}, std::move(a), std::move(b), {}, {}});
}

Program make_loop(Program body, Formula invariant) {
  return program_node({ProgramKind::Loop, {}, {}, {}, {}, std::move(body), {}, {}, std::move(invariant)});
}

Program with_solution(const Program& ode, std::optional<SolutionAnnotation> sol) {
  ProgramNode n = *ode;
  n.solution = std::move(sol);
  return program_node(std::move(n));
}

Program with_invariant(const Program& loop, Formula inv) {
  ProgramNode n = *loop;
  n.invariant = std::move(inv);
  return program_node(std::move(n));
}

// ---------------------------------------------------------------- analyses

namespace {

void collect(const Term& t, VarSet& out) {
  switch (t->kind) {
    case TermKind::Var: out.insert(t->var); break;
    case TermKind::Lit: break;
    case TermKind::Neg: case TermKind::Pow: collect(t->left, out); break;
    default: collect(t->left, out); collect(t->right, out); break;
  }
}

void collect_free(const Formula& f, VarSet& out);

void collect_mentioned(const Program& p, VarSet& out) {
  switch (p->kind) {
    case ProgramKind::Assign:
      out.insert(p->var);
      collect(p->term, out);
      break;
    case ProgramKind::Test:
      collect_free(p->formula, out);
      break;
    case ProgramKind::Ode:
      for (const auto& eq : p->equations) {
        out.insert(eq.var);
        out.insert(eq.var.prime());
        collect(eq.rhs, out);
      }
      collect_free(p->formula, out);
      break;
    case ProgramKind::Choice:
    case ProgramKind::Seq:
      collect_mentioned(p->left, out);
      collect_mentioned(p->right, out);
      break;
    case ProgramKind::Loop:
      collect_mentioned(p->left, out);
      break;
  }
}

void collect_free(const Formula& f, VarSet& out) {
  switch (f->kind) {
    case FormulaKind::True: case FormulaKind::False: break;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      collect(f->lhs, out);
      collect(f->rhs, out);
      break;
    case FormulaKind::Not: collect_free(f->left, out); break;
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      collect_free(f->left, out);
      collect_free(f->right, out);
      break;
    case FormulaKind::Forall: case FormulaKind::Exists: {
      VarSet inner;
      collect_free(f->left, inner);
      inner.erase(f->var);
      out.insert(inner.begin(), inner.end());
      break;
    }
    case FormulaKind::Box: case FormulaKind::Diamond:
      collect_mentioned(f->program, out);
      collect_free(f->left, out);
      break;
  }
}

void collect_bound(const Program& p, VarSet& out) {
  switch (p->kind) {
    case ProgramKind::Assign: out.insert(p->var); break;
    case ProgramKind::Test: break;
    case ProgramKind::Ode:
      for (const auto& eq : p->equations) {
        out.insert(eq.var);
        out.insert(eq.var.prime());
      }
      break;
    case ProgramKind::Choice: case ProgramKind::Seq:
      collect_bound(p->left, out);
      collect_bound(p->right, out);
      break;
    case ProgramKind::Loop: collect_bound(p->left, out); break;
  }
}

void collect_all(const Formula& f, VarSet& out);

void collect_all(const Program& p, VarSet& out) {
  collect_mentioned(p, out);
  switch (p->kind) {
    case ProgramKind::Test: case ProgramKind::Ode: collect_all(p->formula, out); break;
    case ProgramKind::Choice: case ProgramKind::Seq:
      collect_all(p->left, out);
      collect_all(p->right, out);
      break;
    case ProgramKind::Loop: collect_all(p->left, out); break;
    default: break;
  }
}

void collect_all(const Formula& f, VarSet& out) {
  collect_free(f, out);
  switch (f->kind) {
    case FormulaKind::Forall: case FormulaKind::Exists:
      out.insert(f->var);
      collect_all(f->left, out);
      break;
    case FormulaKind::Not: collect_all(f->left, out); break;
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      collect_all(f->left, out);
      collect_all(f->right, out);
      break;
    case FormulaKind::Box: case FormulaKind::Diamond:
      collect_all(f->program, out);
      collect_all(f->left, out);
      break;
    default: break;
  }
}

}  // namespace

VarSet free_vars(const Term& t) {
  VarSet out;
  collect(t, out);
  return out;
}

VarSet free_vars(const Formula& f) {
  VarSet out;
  collect_free(f, out);
  return out;
}

VarSet free_vars(const Program& p) {
  VarSet out;
  collect_mentioned(p, out);
  return out;
}

VarSet bound_vars(const Program& p) {
  VarSet out;
  collect_bound(p, out);
  return out;
}

VarSet all_vars(const Formula& f) {
  VarSet out;
  collect_all(f, out);
  return out;
}

VarSet all_vars(const Program& p) {
  VarSet out;
  collect_all(p, out);
  return out;
}

bool is_quantifier_free(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Forall: case FormulaKind::Exists: return false;
    case FormulaKind::Box: case FormulaKind::Diamond: return false;
    case FormulaKind::Not: return is_quantifier_free(f->left);
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      return is_quantifier_free(f->left) && is_quantifier_free(f->right);
    default: return true;
  }
}

bool is_program_free(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::Box: case FormulaKind::Diamond: return false;
    case FormulaKind::Not: case FormulaKind::Forall: case FormulaKind::Exists:
      return is_program_free(f->left);
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      return is_program_free(f->left) && is_program_free(f->right);
    default: return true;
  }
}

bool has_primed(const Term& t) {
  for (const auto& v : free_vars(t))
    if (v.primed) return true;
  return false;
}

bool is_loop_free(const Program& p) {
  switch (p->kind) {
    case ProgramKind::Loop: return false;
    case ProgramKind::Choice: case ProgramKind::Seq: return is_loop_free(p->left) && is_loop_free(p->right);
    default: return true;
  }
}

// ------------------------------------------------------------ substitution

Term substitute(const Term& t, const TermSubst& s) {
  switch (t->kind) {
    case TermKind::Var: {
      auto it = s.find(t->var);
      return it == s.end() ? t : it->second;
    }
    case TermKind::Lit: return t;
    case TermKind::Neg: {
      Term a = substitute(t->left, s);
      return a == t->left ? t : make_neg(a);
    }
    case TermKind::Pow: {
      Term a = substitute(t->left, s);
      return a == t->left ? t : make_pow(a, t->exponent);
    }
    default: {
      Term a = substitute(t->left, s);
      Term b = substitute(t->right, s);
      if (a == t->left && b == t->right) return t;
      return binary(t->kind, a, b);
    }
  }
}

Term substitute(const Term& t, const VarName& x, const Term& by) { return substitute(t, TermSubst{{x, by}}); }

namespace {

TermSubst restrict_to(const TermSubst& s, const VarSet& vars) {
  TermSubst out;
  for (const auto& [x, t] : s)
    if (vars.count(x)) out.emplace(x, t);
  return out;
}

VarSet replacement_vars(const TermSubst& s) {
  VarSet out;
  for (const auto& [x, t] : s) collect(t, out);
  return out;
}

bool intersects(const VarSet& a, const VarSet& b) {
  for (const auto& v : a)
    if (b.count(v)) return true;
  return false;
}

Formula subst_formula(const Formula& f, const TermSubst& s);
std::pair<Program, Formula> subst_modal(const Program& p, const Formula& post, const TermSubst& s);

// Substitution into a program none of whose binders touches the map.
Program subst_plain(const Program& p, const TermSubst& s) {
  switch (p->kind) {
    case ProgramKind::Assign: return make_assign(p->var, substitute(p->term, s));
    case ProgramKind::Test: return make_test(subst_formula(p->formula, s));
    case ProgramKind::Ode: {
      std::vector<OdeEquation> eqs;
      for (const auto& eq : p->equations) eqs.push_back({eq.var, substitute(eq.rhs, s)});
      std::optional<SolutionAnnotation> sol;
      if (p->solution) {
        sol = SolutionAnnotation{p->solution->time, {}};
        TermSubst inner = s;
        inner.erase(p->solution->time);
        for (const auto& [x, y] : p->solution->solutions) sol->solutions.emplace_back(x, substitute(y, inner));
      }
      return make_ode(std::move(eqs), subst_formula(p->formula, s), std::move(sol));
    }
    case ProgramKind::Choice: return make_choice(subst_plain(p->left, s), subst_plain(p->right, s));
    case ProgramKind::Seq: return make_seq(subst_plain(p->left, s), subst_plain(p->right, s));
    case ProgramKind::Loop:
      return make_loop(subst_plain(p->left, s), p->invariant ? subst_formula(p->invariant, s) : nullptr);
  }
  throw std::logic_error("unreachable");
}

std::pair<Program, Formula> subst_modal(const Program& p, const Formula& post, const TermSubst& s_in) {
  VarSet scope = free_vars(p);
  collect_free(post, scope);
  TermSubst s = restrict_to(s_in, scope);
  if (s.empty()) return {p, post};

  switch (p->kind) {
    case ProgramKind::Assign: {
      Term e = substitute(p->term, s);
      TermSubst after = s;
      after.erase(p->var);
      after = restrict_to(after, free_vars(post));
      if (replacement_vars(after).count(p->var))
        throw CaptureError("assignment to '" + p->var.key() + "' captures the replacement");
      return {make_assign(p->var, e), subst_formula(post, after)};
    }
    case ProgramKind::Test:
      return {make_test(subst_formula(p->formula, s)), subst_formula(post, s)};
    case ProgramKind::Seq: {
      auto [a, inner] = subst_modal(p->left, make_box(p->right, post), s);
      return {make_seq(a, inner->program), inner->left};
    }
    case ProgramKind::Choice: {
      auto [a, pa] = subst_modal(p->left, post, s);
      auto [b, pb] = subst_modal(p->right, post, s);
      if (!structural_eq(pa, pb))
        throw CaptureError("choice branches bind a substituted variable differently");
      return {make_choice(a, b), pa};
    }
    case ProgramKind::Loop:
    case ProgramKind::Ode: {
      VarSet bound = bound_vars(p);
      for (const auto& [x, t] : s) {
        if (bound.count(x)) throw CaptureError("'" + x.key() + "' is bound by the program");
        if (intersects(free_vars(t), bound))
          throw CaptureError("program binds a variable of the replacement for '" + x.key() + "'");
      }
      return {subst_plain(p, s), subst_formula(post, s)};
    }
  }
  throw std::logic_error("unreachable");
}

Formula subst_formula(const Formula& f, const TermSubst& s_in) {
  if (s_in.empty()) return f;
  switch (f->kind) {
    case FormulaKind::True: case FormulaKind::False: return f;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt: {
      Term l = substitute(f->lhs, s_in);
      Term r = substitute(f->rhs, s_in);
      if (l == f->lhs && r == f->rhs) return f;
      return make_cmp(f->kind, l, r);
    }
    case FormulaKind::Not: return make_not(subst_formula(f->left, s_in));
    case FormulaKind::And: return make_and(subst_formula(f->left, s_in), subst_formula(f->right, s_in));
    case FormulaKind::Or: return make_or(subst_formula(f->left, s_in), subst_formula(f->right, s_in));
    case FormulaKind::Imply: return make_imply(subst_formula(f->left, s_in), subst_formula(f->right, s_in));
    case FormulaKind::Equiv: return make_equiv(subst_formula(f->left, s_in), subst_formula(f->right, s_in));
    case FormulaKind::Forall: case FormulaKind::Exists: {
      TermSubst s = s_in;
      s.erase(f->var);
      s = restrict_to(s, free_vars(f->left));
      if (s.empty()) return f;
      if (replacement_vars(s).count(f->var))
        throw CaptureError("quantifier over '" + f->var.key() + "' captures the replacement");
      Formula body = subst_formula(f->left, s);
      return f->kind == FormulaKind::Forall ? make_forall(f->var, body) : make_exists(f->var, body);
    }
    case FormulaKind::Box: case FormulaKind::Diamond: {
      auto [p, post] = subst_modal(f->program, f->left, s_in);
      return f->kind == FormulaKind::Box ? make_box(p, post) : make_diamond(p, post);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Formula substitute(const Formula& f, const TermSubst& s) { return subst_formula(f, s); }

Formula substitute(const Formula& f, const VarName& x, const Term& by) {
  return subst_formula(f, TermSubst{{x, by}});
}

Program substitute(const Program& p, const TermSubst& s) {
  TermSubst active = restrict_to(s, all_vars(p));
  if (active.empty()) return p;
  VarSet bound = bound_vars(p);
  for (const auto& [x, t] : active) {
    if (bound.count(x)) throw CaptureError("'" + x.key() + "' is bound by the program");
    if (intersects(free_vars(t), bound))
      throw CaptureError("program binds a variable of the replacement for '" + x.key() + "'");
  }
  return subst_plain(p, active);
}

// ------------------------------------------------------------ differential

Term differential(const Term& t) {
  switch (t->kind) {
    case TermKind::Var:
      if (t->var.primed) throw std::invalid_argument("differential of a primed variable");
      return make_var(t->var.prime());
    case TermKind::Lit: return make_lit(0);
    case TermKind::Neg: return make_neg(differential(t->left));
    case TermKind::Plus: return make_plus(differential(t->left), differential(t->right));
    case TermKind::Minus: return make_minus(differential(t->left), differential(t->right));
    case TermKind::Times:
      if (t->left->kind == TermKind::Lit) return make_times(t->left, differential(t->right));
      if (t->right->kind == TermKind::Lit) return make_times(differential(t->left), t->right);
      return make_plus(make_times(differential(t->left), t->right),
                       make_times(t->left, differential(t->right)));
    case TermKind::Pow: {
      unsigned n = t->exponent;
      if (n == 0) return make_lit(0);
      if (n == 1) return differential(t->left);
      Term power = n == 2 ? t->left : make_pow(t->left, n - 1);
      return make_times(make_times(make_lit(n), power), differential(t->left));
    }
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------- simplify

namespace {

std::optional<Rational> literal_value(const Term& t) {
  if (t->kind == TermKind::Lit) return t->value;
  if (t->kind == TermKind::Neg && t->left->kind == TermKind::Lit) return Rational(-t->left->value);
  return std::nullopt;
}

bool is_lit(const Term& t, int v) {
  auto lv = literal_value(t);
  return lv && *lv == v;
}

}  // namespace

Term simplify(const Term& t) {
  switch (t->kind) {
    case TermKind::Var: case TermKind::Lit: return t;
    case TermKind::Neg: {
      Term a = simplify(t->left);
      if (auto v = literal_value(a)) return make_lit(-*v);
      if (a->kind == TermKind::Neg) return a->left;
      return make_neg(a);
    }
    case TermKind::Pow: {
      Term a = simplify(t->left);
      if (auto v = literal_value(a)) return make_lit(pow(*v, t->exponent));
      if (t->exponent == 0) return make_lit(1);
      if (t->exponent == 1) return a;
      return make_pow(a, t->exponent);
    }
    case TermKind::Plus: {
      Term a = simplify(t->left), b = simplify(t->right);
      auto va = literal_value(a), vb = literal_value(b);
      if (va && vb) return make_lit(*va + *vb);
      if (is_lit(a, 0)) return b;
      if (is_lit(b, 0)) return a;
      return make_plus(a, b);
    }
    case TermKind::Minus: {
      Term a = simplify(t->left), b = simplify(t->right);
      auto va = literal_value(a), vb = literal_value(b);
      if (va && vb) return make_lit(*va - *vb);
      if (is_lit(b, 0)) return a;
      if (is_lit(a, 0)) return b->kind == TermKind::Neg ? b->left : make_neg(b);
      return make_minus(a, b);
    }
    case TermKind::Times: {
      Term a = simplify(t->left), b = simplify(t->right);
      auto va = literal_value(a), vb = literal_value(b);
      if (va && vb) return make_lit(*va * *vb);
      if (is_lit(a, 0) || is_lit(b, 0)) return make_lit(0);
      if (is_lit(a, 1)) return b;
      if (is_lit(b, 1)) return a;
      return make_times(a, b);
    }
  }
  throw std::logic_error("unreachable");
}

namespace {

Program simplify_program(const Program& p);

Formula simplify_formula(const Formula& f) {
  switch (f->kind) {
    case FormulaKind::True: case FormulaKind::False: return f;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      return make_cmp(f->kind, simplify(f->lhs), simplify(f->rhs));
    case FormulaKind::Not: return make_not(simplify_formula(f->left));
    case FormulaKind::And: return make_and(simplify_formula(f->left), simplify_formula(f->right));
    case FormulaKind::Or: return make_or(simplify_formula(f->left), simplify_formula(f->right));
    case FormulaKind::Imply: return make_imply(simplify_formula(f->left), simplify_formula(f->right));
    case FormulaKind::Equiv: return make_equiv(simplify_formula(f->left), simplify_formula(f->right));
    case FormulaKind::Forall: return make_forall(f->var, simplify_formula(f->left));
    case FormulaKind::Exists: return make_exists(f->var, simplify_formula(f->left));
    case FormulaKind::Box: return make_box(simplify_program(f->program), simplify_formula(f->left));
    case FormulaKind::Diamond: return make_diamond(simplify_program(f->program), simplify_formula(f->left));
  }
  throw std::logic_error("unreachable");
}

Program simplify_program(const Program& p) {
  switch (p->kind) {
    case ProgramKind::Assign: return make_assign(p->var, simplify(p->term));
    case ProgramKind::Test: return make_test(simplify_formula(p->formula));
    case ProgramKind::Ode: {
      std::vector<OdeEquation> eqs;
      for (const auto& eq : p->equations) eqs.push_back({eq.var, simplify(eq.rhs)});
      std::optional<SolutionAnnotation> sol;
      if (p->solution) {
        sol = SolutionAnnotation{p->solution->time, {}};
        for (const auto& [x, y] : p->solution->solutions) sol->solutions.emplace_back(x, simplify(y));
      }
      return make_ode(std::move(eqs), simplify_formula(p->formula), std::move(sol));
    }
    case ProgramKind::Choice: return make_choice(simplify_program(p->left), simplify_program(p->right));
    case ProgramKind::Seq: return make_seq(simplify_program(p->left), simplify_program(p->right));
    case ProgramKind::Loop:
      return make_loop(simplify_program(p->left), p->invariant ? simplify_formula(p->invariant) : nullptr);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

Formula simplify(const Formula& f) { return simplify_formula(f); }

// ---------------------------------------------------------------- equality

bool structural_eq(const Term& a, const Term& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case TermKind::Var: return a->var == b->var;
    case TermKind::Lit: return a->value == b->value;
    case TermKind::Neg: return structural_eq(a->left, b->left);
    case TermKind::Pow: return a->exponent == b->exponent && structural_eq(a->left, b->left);
    default: return structural_eq(a->left, b->left) && structural_eq(a->right, b->right);
  }
}

bool structural_eq(const Formula& a, const Formula& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case FormulaKind::True: case FormulaKind::False: return true;
    case FormulaKind::Eq: case FormulaKind::Neq: case FormulaKind::Geq:
    case FormulaKind::Gt: case FormulaKind::Leq: case FormulaKind::Lt:
      return structural_eq(a->lhs, b->lhs) && structural_eq(a->rhs, b->rhs);
    case FormulaKind::Not: return structural_eq(a->left, b->left);
    case FormulaKind::And: case FormulaKind::Or: case FormulaKind::Imply: case FormulaKind::Equiv:
      return structural_eq(a->left, b->left) && structural_eq(a->right, b->right);
    case FormulaKind::Forall: case FormulaKind::Exists:
      return a->var == b->var && structural_eq(a->left, b->left);
    case FormulaKind::Box: case FormulaKind::Diamond:
      return structural_eq(a->program, b->program) && structural_eq(a->left, b->left);
  }
  return false;
}

bool structural_eq(const Program& a, const Program& b) {
  if (a == b) return true;
  if (!a || !b || a->kind != b->kind) return false;
  switch (a->kind) {
    case ProgramKind::Assign: return a->var == b->var && structural_eq(a->term, b->term);
    case ProgramKind::Test: return structural_eq(a->formula, b->formula);
    case ProgramKind::Ode:
      if (a->equations.size() != b->equations.size()) return false;
      for (size_t i = 0; i < a->equations.size(); ++i)
        if (a->equations[i].var != b->equations[i].var ||
            !structural_eq(a->equations[i].rhs, b->equations[i].rhs))
          return false;
      return structural_eq(a->formula, b->formula);
    case ProgramKind::Choice: case ProgramKind::Seq:
      return structural_eq(a->left, b->left) && structural_eq(a->right, b->right);
    case ProgramKind::Loop: return structural_eq(a->left, b->left);
  }
  return false;
}

VarName fresh_var(const std::string& base, const VarSet& taken) {
  VarName candidate{base};
  for (int i = 1; taken.count(candidate) || taken.count(candidate.prime()); ++i)
    candidate = VarName{base + "_" + std::to_string(i)};
  return candidate;
}

}  // namespace dl
