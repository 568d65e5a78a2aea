#include "dl/kernel.hpp"

#include <deque>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "dl/polynomial.hpp"

namespace dl {

namespace {

std::string side_name(Side s) { return s == Side::Antecedent ? "ante" : "succ"; }
std::string side_word(Side s) { return s == Side::Antecedent ? "antecedent" : "succedent"; }

bool contains(const std::vector<Formula>& fs, const Formula& f) {
  for (const auto& g : fs)
    if (structural_eq(g, f)) return true;
  return false;
}

void dedup(std::vector<Formula>& fs) {
  std::vector<Formula> out;
  for (auto& f : fs)
    if (!contains(out, f)) out.push_back(std::move(f));
  fs = std::move(out);
}

bool identity_closes(const Sequent& s) {
  for (const auto& a : s.antecedent)
    if (contains(s.succedent, a)) return true;
  return false;
}

VarSet sequent_free_vars(const Sequent& s) {
  VarSet out;
  for (const auto* side : {&s.antecedent, &s.succedent})
    for (const auto& f : *side) {
      VarSet fv = free_vars(f);
      out.insert(fv.begin(), fv.end());
    }
  return out;
}

VarSet sequent_all_vars(const Sequent& s) {
  VarSet out;
  for (const auto* side : {&s.antecedent, &s.succedent})
    for (const auto& f : *side) {
      VarSet av = all_vars(f);
      out.insert(av.begin(), av.end());
    }
  return out;
}

// Replaces the bound variable of a quantifier by a name not free anywhere
// else in the sequent. Returns null when the renaming is not admissible.
Formula skolemize(const Sequent& s, const Formula& q) {
  VarSet taken = sequent_free_vars(s);
  VarSet inner = all_vars(q->left);
  inner.erase(q->var);
  taken.insert(inner.begin(), inner.end());
  VarName fresh = fresh_var(q->var.base, taken);
  if (fresh == q->var) return q->left;
  try {
    return substitute(q->left, q->var, make_var(fresh));
  } catch (const CaptureError&) {
    return nullptr;
  }
}

using Split = std::optional<std::vector<Sequent>>;

// One propositional or quantifier step on the first decomposable formula.
Split decompose(const Sequent& s) {
  for (size_t i = 0; i < s.antecedent.size(); ++i) {
    const Formula& f = s.antecedent[i];
    auto without = [&] {
      Sequent r = s;
      r.antecedent.erase(r.antecedent.begin() + static_cast<long>(i));
      return r;
    };
    auto replaced = [&](std::initializer_list<Formula> by) {
      Sequent r = without();
      r.antecedent.insert(r.antecedent.begin() + static_cast<long>(i), by);
      return r;
    };
    switch (f->kind) {
      case FormulaKind::True: return std::vector{without()};
      case FormulaKind::False: return std::vector<Sequent>{};
      case FormulaKind::And: return std::vector{replaced({f->left, f->right})};
      case FormulaKind::Or: return std::vector{replaced({f->left}), replaced({f->right})};
      case FormulaKind::Imply: {
        Sequent a = without();
        a.succedent.push_back(f->left);
        return std::vector{a, replaced({f->right})};
      }
      case FormulaKind::Not: {
        Sequent r = without();
        r.succedent.push_back(f->left);
        return std::vector{r};
      }
      case FormulaKind::Equiv: {
        Sequent b = without();
        b.succedent.push_back(f->left);
        b.succedent.push_back(f->right);
        return std::vector{replaced({f->left, f->right}), b};
      }
      case FormulaKind::Exists:
        if (Formula body = skolemize(s, f)) return std::vector{replaced({body})};
        break;
      default: break;
    }
  }
  for (size_t j = 0; j < s.succedent.size(); ++j) {
    const Formula& f = s.succedent[j];
    auto without = [&] {
      Sequent r = s;
      r.succedent.erase(r.succedent.begin() + static_cast<long>(j));
      return r;
    };
    auto replaced = [&](std::initializer_list<Formula> by) {
      Sequent r = without();
      r.succedent.insert(r.succedent.begin() + static_cast<long>(j), by);
      return r;
    };
    switch (f->kind) {
      case FormulaKind::True: return std::vector<Sequent>{};
      case FormulaKind::False: return std::vector{without()};
      case FormulaKind::And: return std::vector{replaced({f->left}), replaced({f->right})};
      case FormulaKind::Or: return std::vector{replaced({f->left, f->right})};
      case FormulaKind::Imply: {
        Sequent r = replaced({f->right});
        r.antecedent.push_back(f->left);
        return std::vector{r};
      }
      case FormulaKind::Not: {
        Sequent r = without();
        r.antecedent.push_back(f->left);
        return std::vector{r};
      }
      case FormulaKind::Equiv: {
        Sequent a = replaced({f->right});
        a.antecedent.push_back(f->left);
        Sequent b = replaced({f->left});
        b.antecedent.push_back(f->right);
        return std::vector{a, b};
      }
      case FormulaKind::Forall:
        if (Formula body = skolemize(s, f)) return std::vector{replaced({body})};
        break;
      default: break;
    }
  }
  return std::nullopt;
}

void normalize_into(Sequent s, std::vector<Sequent>& out) {
  dedup(s.antecedent);
  dedup(s.succedent);
  if (identity_closes(s)) return;
  Split parts = decompose(s);
  if (!parts) {
    out.push_back(std::move(s));
    return;
  }
  for (auto& p : *parts) normalize_into(std::move(p), out);
}

// --------------------------------------------------------------- targets

using Pred = std::function<bool(const Formula&)>;

std::vector<Formula>& side_of(Sequent& s, Side side) {
  return side == Side::Antecedent ? s.antecedent : s.succedent;
}
const std::vector<Formula>& side_of(const Sequent& s, Side side) {
  return side == Side::Antecedent ? s.antecedent : s.succedent;
}

// Resolves an explicit target or searches the allowed sides in order.
Target locate(const Sequent& s, const std::optional<Target>& target, std::vector<Side> sides, const Pred& fits,
              const std::string& error_kind, const std::string& wanted) {
  if (target) {
    const auto& fs = side_of(s, target->side);
    if (target->index >= fs.size())
      throw RuleError("NoSuchFormula", "no formula at " + side_name(target->side) + " " + std::to_string(target->index));
    bool side_ok = false;
    for (Side sd : sides) side_ok |= sd == target->side;
    if (!side_ok || !fits(fs[target->index]))
      throw RuleError(error_kind, "expected " + wanted + " in the " + (sides.size() == 1 ? side_word(sides[0]) : "sequent") +
                                      ", found '" + to_string(fs[target->index]) + "' at " + side_name(target->side) + " " +
                                      std::to_string(target->index));
    return *target;
  }
  for (Side sd : sides) {
    const auto& fs = side_of(s, sd);
    for (size_t i = 0; i < fs.size(); ++i)
      if (fits(fs[i])) return {sd, i};
  }
  throw RuleError(error_kind, "no " + wanted + " in the sequent");
}

Sequent replace_at(const Sequent& s, Target t, const std::vector<Formula>& by) {
  Sequent r = s;
  auto& fs = side_of(r, t.side);
  fs.erase(fs.begin() + static_cast<long>(t.index));
  fs.insert(fs.begin() + static_cast<long>(t.index), by.begin(), by.end());
  return r;
}

bool is_box(const Formula& f) { return f->kind == FormulaKind::Box; }
bool is_modal_formula(const Formula& f) { return f->kind == FormulaKind::Box || f->kind == FormulaKind::Diamond; }

Formula dual(const Formula& diamond) {
  return make_not(make_box(diamond->program, make_not(diamond->left)));
}

Formula subst_or_fail(const Formula& f, const TermSubst& s) {
  try {
    return substitute(f, s);
  } catch (const CaptureError& e) {
    throw RuleError("CaptureError", e.what());
  }
}

const char* kind_rule(ProgramKind k) {
  switch (k) {
    case ProgramKind::Assign: return "assign";
    case ProgramKind::Test: return "test";
    case ProgramKind::Choice: return "choice";
    case ProgramKind::Seq: return "compose";
    case ProgramKind::Loop: return "unwind";
    case ProgramKind::Ode: return "solve";
  }
  return "?";
}

// The axiom for the outermost program of a box formula.
Formula box_axiom(const Formula& f, const std::string& rule) {
  const Program& p = f->program;
  const Formula& post = f->left;
  std::string expected = rule == "box" ? kind_rule(p->kind) : rule;
  if (p->kind == ProgramKind::Ode)
    throw RuleError("ODERequiresDedicatedRule", "'" + to_string(f) + "' needs solve or dI");
  if (expected != kind_rule(p->kind))
    throw RuleError("RuleMismatch", rule + " does not apply to '" + to_string(f) + "'");
  switch (p->kind) {
    case ProgramKind::Assign: return subst_or_fail(post, {{p->var, p->term}});
    case ProgramKind::Test: return make_imply(p->formula, post);
    case ProgramKind::Choice: return make_and(make_box(p->left, post), make_box(p->right, post));
    case ProgramKind::Seq: return make_box(p->left, make_box(p->right, post));
    case ProgramKind::Loop: return make_and(post, make_box(p->left, make_box(p, post)));
    case ProgramKind::Ode: break;
  }
  return f;
}

std::vector<Sequent> rule_box(const Sequent& s, const std::string& rule, const std::optional<Target>& target) {
  Target t = locate(s, target, {Side::Succedent, Side::Antecedent}, is_modal_formula, "NotABoxFormula",
                    "a box or diamond formula");
  Formula f = side_of(s, t.side)[t.index];
  if (rule == "diamond") {
    if (f->kind != FormulaKind::Diamond) throw RuleError("NotADiamondFormula", "'" + to_string(f) + "' is not a diamond");
    return {replace_at(s, t, {dual(f)})};
  }
  if (f->kind == FormulaKind::Diamond) {
    Formula inner = dual(f)->left;
    return {replace_at(s, t, {make_not(box_axiom(inner, rule))})};
  }
  return {replace_at(s, t, {box_axiom(f, rule)})};
}

Formula succ_box(const Sequent& s, const std::optional<Target>& target, Target& where, ProgramKind kind,
                 const std::string& error_kind, const std::string& wanted) {
  where = locate(
      s, target, {Side::Succedent},
      [&](const Formula& f) { return is_box(f) && f->program->kind == kind; }, error_kind, wanted);
  return s.succedent[where.index];
}

std::vector<Sequent> rule_loop(const Sequent& s, const std::optional<Target>& target, const RuleArgs& args) {
  Target t;
  Formula f = succ_box(s, target, t, ProgramKind::Loop, "NotALoop", "a [loop]P formula");
  Formula inv = args.invariant ? args.invariant : f->program->invariant;
  if (!inv) throw RuleError("MissingInvariant", "loop needs an invariant (with { inv = ... })");
  return {replace_at(s, t, {inv}), Sequent{{inv}, {make_box(f->program->left, inv)}}, Sequent{{inv}, {f->left}}};
}

std::vector<Sequent> rule_solve(const Sequent& s, const std::optional<Target>& target, const RuleArgs& args) {
  Target t;
  Formula f = succ_box(s, target, t, ProgramKind::Ode, "NotAnOde", "an [ODE]P formula");
  const Program& ode = f->program;
  std::optional<SolutionAnnotation> sol = args.solution ? args.solution : ode->solution;
  if (!sol) throw RuleError("MissingSolution", "no solution given for '" + to_string(ode) + "'");

  VarSet ode_vars;
  for (const auto& eq : ode->equations) ode_vars.insert(eq.var);
  for (const auto& [x, y] : sol->solutions)
    if (!ode_vars.count(x)) throw RuleError("MissingSolution", "'" + x.base + "' is not an ODE variable");
  for (const auto& x : ode_vars)
    if (!sol->find(x)) throw RuleError("MissingSolution", "no solution for '" + x.base + "'");

  VarSet taken = sequent_all_vars(s);
  VarName time = sol->time;
  TermSubst ys;
  for (const auto& [x, y] : sol->solutions) {
    for (const auto& v : free_vars(y))
      if (v != time && (v.primed || (ode_vars.count(v) == 0 && bound_vars(ode).count(v))))
        throw RuleError("MissingSolution", "solution for '" + x.base + "' mentions '" + v.key() + "'");
    ys[x] = y;
  }
  if (taken.count(time)) {
    VarName renamed = fresh_var(time.base, taken);
    for (auto& [x, y] : ys) y = substitute(y, time, make_var(renamed));
    time = renamed;
  }

  for (const auto& eq : ode->equations) {
    const Term& y = ys.at(eq.var);
    Polynomial at_zero = poly_normalize(substitute(y, time, make_lit(Rational(0)))) - poly_normalize(make_var(eq.var));
    if (!at_zero.is_zero())
      throw RuleError("SolutionCheckFailed",
                      eq.var.base + ": initial value differs by " + at_zero.to_string());
    Polynomial residual = poly_normalize(substitute(eq.rhs, ys)) - poly_normalize(y).derivative(time.key());
    if (!residual.is_zero())
      throw RuleError("SolutionCheckFailed", eq.var.base + ": residual " + residual.to_string());
  }

  Term tt = make_var(time);
  Term zero = make_lit(Rational(0));
  Formula post = subst_or_fail(f->left, ys);
  if (ode->formula->kind != FormulaKind::True) {
    taken.insert(time);
    VarName sv = fresh_var("s", taken);
    TermSubst ys_s;
    for (const auto& [x, y] : ys) ys_s[x] = substitute(y, time, make_var(sv));
    Formula range = make_and(make_cmp(FormulaKind::Leq, zero, make_var(sv)), make_cmp(FormulaKind::Leq, make_var(sv), tt));
    Formula guard = make_forall(sv, make_imply(range, subst_or_fail(ode->formula, ys_s)));
    post = make_imply(guard, post);
  }
  Formula goal = make_forall(time, make_imply(make_cmp(FormulaKind::Geq, tt, zero), post));
  return {replace_at(s, t, {goal})};
}

std::vector<Sequent> rule_dI(const Sequent& s, const std::optional<Target>& target) {
  Target t;
  Formula f = succ_box(s, target, t, ProgramKind::Ode, "NotAnOde", "an [ODE]P formula");
  const Formula& post = f->left;
  if (post->kind != FormulaKind::Eq) throw RuleError("NotAnEquation", "'" + to_string(post) + "' is not an equation");
  if (!contains(s.antecedent, post))
    throw RuleError("MissingInitialCondition", "antecedent does not contain '" + to_string(post) + "'");
  if (has_primed(post->lhs) || has_primed(post->rhs))
    throw RuleError("NotAnEquation", "'" + to_string(post) + "' already mentions differential symbols");
  const Program& ode = f->program;
  Term dl = differential(post->lhs), dr = differential(post->rhs);
  TermSubst primes;
  for (const auto& eq : ode->equations) primes[eq.var.prime()] = eq.rhs;
  for (const Term* d : {&dl, &dr})
    for (const auto& v : free_vars(*d))
      if (v.primed && !primes.count(v)) primes[v] = make_lit(Rational(0));
  Formula goal = make_cmp(FormulaKind::Eq, simplify(substitute(dl, primes)), simplify(substitute(dr, primes)));
  return {Sequent{{ode->formula}, {goal}}};
}

Formula require(const Formula& f, const std::string& rule, const std::string& key) {
  if (!f) throw RuleError("MissingArgument", rule + " needs with { " + key + " = ... }");
  return f;
}

std::vector<Sequent> rule_modal(const Sequent& s, const std::string& rule, const std::optional<Target>& target,
                                const RuleArgs& args) {
  std::vector<Side> sides = rule == "V" ? std::vector{Side::Succedent, Side::Antecedent} : std::vector{Side::Succedent};
  Target t = locate(s, target, sides, is_box, "NotABoxFormula", "a box formula");
  Formula f = side_of(s, t.side)[t.index];
  const Program& a = f->program;
  if (rule == "M") {
    Formula b = require(args.intermediate, rule, "B");
    return {replace_at(s, t, {make_box(a, b)}), Sequent{{b}, {f->left}}};
  }
  if (rule == "G") return {Sequent{{}, {f->left}}};
  if (rule == "K") {
    Formula p = require(args.intermediate, rule, "P");
    return {replace_at(s, t, {make_box(a, make_imply(p, f->left))}), replace_at(s, t, {make_box(a, p)})};
  }
  // V
  VarSet fv = free_vars(f->left), bv = bound_vars(a);
  for (const auto& v : fv)
    if (bv.count(v))
      throw RuleError("SideConditionViolated", "'" + v.key() + "' is free in the postcondition and bound by the program");
  return {replace_at(s, t, {f->left})};
}

std::vector<Sequent> rule_quantifier(const Sequent& s, const std::string& rule, const std::optional<Target>& target,
                                     const RuleArgs& args) {
  bool left = rule == "allL";
  FormulaKind kind = left ? FormulaKind::Forall : FormulaKind::Exists;
  Target t = locate(
      s, target, {left ? Side::Antecedent : Side::Succedent}, [&](const Formula& f) { return f->kind == kind; },
      left ? "NotAForall" : "NotAnExists", left ? "a universal formula" : "an existential formula");
  if (!args.witness) throw RuleError("MissingArgument", rule + " needs with { witness = ... }");
  Formula f = side_of(s, t.side)[t.index];
  Formula inst = subst_or_fail(f->left, {{f->var, args.witness}});
  if (left) {
    Sequent r = s;
    r.antecedent.push_back(inst);
    return {r};
  }
  return {replace_at(s, t, {inst})};
}

}  // namespace

// ---------------------------------------------------------------- public

std::string Sequent::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < antecedent.size(); ++i) os << (i ? ", " : "") << dl::to_string(antecedent[i]);
  os << (antecedent.empty() ? "|- " : " |- ");
  for (size_t i = 0; i < succedent.size(); ++i) os << (i ? ", " : "") << dl::to_string(succedent[i]);
  return os.str();
}

bool Sequent::operator==(const Sequent& o) const {
  auto same = [](const std::vector<Formula>& a, const std::vector<Formula>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (!structural_eq(a[i], b[i])) return false;
    return true;
  };
  return same(antecedent, o.antecedent) && same(succedent, o.succedent);
}

const std::vector<std::string>& rule_names() {
  static const std::vector<std::string> names{"assign", "test", "choice", "compose", "unwind", "diamond",
                                              "box",    "loop", "solve",  "dI",      "M",      "G",
                                              "V",      "K",    "allL",   "existsR", "hide",   "close"};
  return names;
}

std::vector<Sequent> normalize(const Sequent& s) {
  std::vector<Sequent> out;
  normalize_into(s, out);
  return out;
}

std::vector<Sequent> apply_rule(const Sequent& s, const std::string& rule, const std::optional<Target>& target,
                                const RuleArgs& args) {
  if (rule == "assign" || rule == "test" || rule == "choice" || rule == "compose" || rule == "unwind" ||
      rule == "diamond" || rule == "box")
    return rule_box(s, rule, target);
  if (rule == "loop") return rule_loop(s, target, args);
  if (rule == "solve") return rule_solve(s, target, args);
  if (rule == "dI") return rule_dI(s, target);
  if (rule == "M" || rule == "G" || rule == "V" || rule == "K") return rule_modal(s, rule, target, args);
  if (rule == "allL" || rule == "existsR") return rule_quantifier(s, rule, target, args);
  if (rule == "hide") {
    if (!target) throw RuleError("MissingArgument", "hide needs an explicit target");
    Target t = locate(s, target, {Side::Antecedent, Side::Succedent}, [](const Formula&) { return true; },
                      "NoSuchFormula", "a formula");
    return {replace_at(s, t, {})};
  }
  if (rule == "close") throw RuleError("UnknownRule", "close is applied by a proof session");
  throw RuleError("UnknownRule", "'" + rule + "'");
}

std::string to_string(ResultKind k) {
  switch (k) {
    case ResultKind::Closed: return "Closed";
    case ResultKind::Open: return "Open";
    case ResultKind::OracleAssumed: return "OracleAssumed";
    case ResultKind::Refuted: return "Refuted";
  }
  return "?";
}

std::string ProofResult::to_json() const {
  nlohmann::ordered_json j;
  j["result"] = to_string(kind);
  auto goals = [](const std::vector<ProofGoal>& gs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& g : gs) arr.push_back({{"id", g.id}, {"sequent", g.sequent.to_string()}});
    return arr;
  };
  j["open_goals"] = goals(open_goals);
  j["steps"] = steps;
  j["arith_methods"] = nlohmann::ordered_json::object();
  for (const auto& [m, n] : arith_methods) j["arith_methods"][m] = n;
  if (!oracle_assumed.empty()) j["oracle_assumed"] = goals(oracle_assumed);
  if (refuted_goal) {
    j["refuted_goal"] = {{"id", refuted_goal->id}, {"sequent", refuted_goal->sequent.to_string()}};
    nlohmann::ordered_json cex = nlohmann::ordered_json::object();
    for (const auto& [v, r] : counterexample) cex[v.key()] = dl::to_string(r);
    j["counterexample"] = cex;
  }
  return j.dump();
}

// --------------------------------------------------------------- session

ProofSession::ProofSession(Formula conjecture, ClosePolicy policy) : policy_(std::move(policy)) {
  int root = add_node(-1, "conjecture", Sequent{{}, {std::move(conjecture)}}, false);
  settle(root, tree_[root].sequent);
}

int ProofSession::add_node(int parent, const std::string& rule, Sequent s, bool open) {
  int id = static_cast<int>(tree_.size());
  if (open) open_[id] = s;
  tree_.push_back(GoalNode{id, parent, rule, std::move(s), {}, "open"});
  if (parent >= 0) tree_[parent].children.push_back(id);
  return id;
}

// Normalizes goal `id`. An unchanged goal stays open under its own id.
std::vector<int> ProofSession::settle(int id, Sequent s) {
  std::vector<Sequent> parts = normalize(s);
  if (parts.size() == 1 && parts[0] == s) {
    open_[id] = std::move(s);
    return {id};
  }
  open_.erase(id);
  tree_[id].status = parts.empty() ? "closed" : "split";
  std::vector<int> ids;
  for (auto& p : parts) ids.push_back(add_node(id, "normalize", std::move(p), true));
  return ids;
}

void ProofSession::close_goal(int id, const Sequent& s) {
  for (const auto* side : {&s.antecedent, &s.succedent})
    for (const auto& f : *side)
      if (!is_program_free(f)) throw RuleError("ContainsModality", "'" + to_string(f) + "' is not program-free");
  ArithGoal g;
  for (const auto& f : s.antecedent)
    if (is_quantifier_free(f)) g.antecedent.push_back(f);
  for (const auto& f : s.succedent)
    if (is_quantifier_free(f)) g.succedent.push_back(f);
  Verdict v;
  try {
    v = decide(g, policy_.arith);
  } catch (const SolverUnavailable& e) {
    v = Verdict::unknown(e.what());
  } catch (const ProtocolError& e) {
    v = Verdict::unknown(e.what());
  }
  switch (v.kind) {
    case VerdictKind::Valid:
      tree_[id].status = "closed";
      open_.erase(id);
      ++methods_[v.method];
      break;
    case VerdictKind::Invalid:
      tree_[id].status = "refuted";
      open_.erase(id);
      if (!refuted_) {
        refuted_ = ProofGoal{id, s};
        counterexample_ = v.counterexample;
      }
      break;
    case VerdictKind::Unknown:
      if (policy_.permissive) {
        tree_[id].status = "assumed";
        open_.erase(id);
        assumed_.push_back({id, s});
        ++methods_["oracle"];
      }
      break;
  }
}

std::vector<int> ProofSession::apply(const ProofStep& step) {
  auto it = open_.find(step.goal);
  if (it == open_.end()) throw RuleError("UnknownGoal", "goal " + std::to_string(step.goal) + " is not open");
  ++steps_;
  Sequent s = it->second;
  if (step.rule == "close") {
    close_goal(step.goal, s);
    return open_.count(step.goal) ? std::vector{step.goal} : std::vector<int>{};
  }
  std::vector<Sequent> premises = apply_rule(s, step.rule, step.target, step.args);
  open_.erase(step.goal);
  tree_[step.goal].status = premises.empty() ? "closed" : "split";
  std::vector<int> ids;
  for (auto& p : premises) {
    int raw = add_node(step.goal, step.rule, p, false);
    for (int id : settle(raw, std::move(p))) ids.push_back(id);
  }
  return ids;
}

ProofResult ProofSession::result() const {
  ProofResult r;
  r.steps = steps_;
  r.arith_methods = methods_;
  for (const auto& [id, s] : open_) r.open_goals.push_back({id, s});
  r.oracle_assumed = assumed_;
  if (refuted_) {
    r.kind = ResultKind::Refuted;
    r.refuted_goal = refuted_;
    r.counterexample = counterexample_;
  } else if (!open_.empty()) {
    r.kind = ResultKind::Open;
  } else if (!assumed_.empty()) {
    r.kind = ResultKind::OracleAssumed;
  } else {
    r.kind = ResultKind::Closed;
  }
  return r;
}

ProofResult check_proof(const ModelFile& m, const std::vector<ProofStep>& script, const ClosePolicy& policy,
                        std::vector<GoalNode>* tree) {
  TermSubst consts = constant_bindings(m);
  auto spec_f = [&](const Formula& f) { return f ? simplify(substitute(f, consts)) : f; };
  ProofSession session(specialize(m), policy);
  for (const ProofStep& raw : script) {
    ProofStep step = raw;
    step.args.invariant = spec_f(raw.args.invariant);
    step.args.intermediate = spec_f(raw.args.intermediate);
    if (raw.args.witness) step.args.witness = simplify(substitute(raw.args.witness, consts));
    if (raw.args.solution)
      for (auto& [x, y] : step.args.solution->solutions) y = simplify(substitute(y, consts));
    try {
      session.apply(step);
    } catch (const RuleError& e) {
      std::string where = "line " + std::to_string(step.line) + ", goal " + std::to_string(step.goal);
      auto it = session.open_goals().find(step.goal);
      if (it != session.open_goals().end()) where += " (" + it->second.to_string() + ")";
      throw RuleError(e.kind(), where + ": " + std::string(e.what()).substr(e.kind().size() + 2));
    }
    if (session.refuted()) break;
  }
  if (tree) *tree = session.tree();
  return session.result();
}

}  // namespace dl
