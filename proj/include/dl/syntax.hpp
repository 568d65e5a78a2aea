#pragma once

// Abstract syntax of terms, dL formulas and hybrid programs, with the
// variable analyses, substitution and syntactic differentials the kernel
// relies on. Nodes are immutable and shared.

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dl/errors.hpp"
#include "dl/rational.hpp"

namespace dl {

struct VarName {
  std::string base;
  bool primed = false;

  VarName() = default;
  VarName(std::string b, bool p = false) : base(std::move(b)), primed(p) {}
  VarName(const char* b) : base(b) {}

  // "x" or "x'"; the key used by states and polynomials.
  std::string key() const { return primed ? base + "'" : base; }
  VarName prime() const { return {base, true}; }

  auto operator<=>(const VarName&) const = default;
  bool operator==(const VarName&) const = default;
};

// Throws std::invalid_argument unless `name` matches [a-zA-Z][a-zA-Z0-9_]*.
void check_identifier(const std::string& name);
VarName var_from_key(const std::string& key);

using VarSet = std::set<VarName>;

// ---------------------------------------------------------------- terms

enum class TermKind { Var, Lit, Neg, Plus, Minus, Times, Pow };

struct TermNode;
using Term = std::shared_ptr<const TermNode>;

struct TermNode {
  TermKind kind;
  VarName var;           // Var
  Rational value;        // Lit, always >= 0
  Term left, right;      // Neg uses left only
  unsigned exponent = 0; // Pow
};

Term make_var(const VarName& v);
// Negative values become Neg(Lit(|r|)) so literals stay nonnegative.
Term make_lit(const Rational& r);
Term make_neg(Term t);
Term make_plus(Term a, Term b);
Term make_minus(Term a, Term b);
Term make_times(Term a, Term b);
Term make_pow(Term base, unsigned exponent);

// ------------------------------------------------------------- formulas

enum class FormulaKind {
  True, False,
  Eq, Neq, Geq, Gt, Leq, Lt,
  Not, And, Or, Imply, Equiv,
  Forall, Exists,
  Box, Diamond
};

struct FormulaNode;
struct ProgramNode;
using Formula = std::shared_ptr<const FormulaNode>;
using Program = std::shared_ptr<const ProgramNode>;

struct FormulaNode {
  FormulaKind kind;
  Term lhs, rhs;          // comparisons
  Formula left, right;    // connectives; quantifier/modal body in left
  VarName var;            // quantifiers
  Program program;        // modalities
};

Formula make_true();
Formula make_false();
Formula make_cmp(FormulaKind kind, Term lhs, Term rhs);
Formula make_not(Formula f);
Formula make_and(Formula a, Formula b);
Formula make_or(Formula a, Formula b);
Formula make_imply(Formula a, Formula b);
Formula make_equiv(Formula a, Formula b);
Formula make_forall(const VarName& v, Formula body);
Formula make_exists(const VarName& v, Formula body);
Formula make_box(Program p, Formula post);
Formula make_diamond(Program p, Formula post);

// Conjunction/disjunction of a list; empty lists give true/false.
Formula conjunction(const std::vector<Formula>& parts);
Formula disjunction(const std::vector<Formula>& parts);
// Flattens nested And (resp. Or) nodes into their operands.
std::vector<Formula> conjuncts(const Formula& f);
std::vector<Formula> disjuncts(const Formula& f);

bool is_comparison(FormulaKind k);
bool is_modal(FormulaKind k);

// ------------------------------------------------------------- programs

enum class ProgramKind { Assign, Test, Ode, Choice, Seq, Loop };

struct OdeEquation {
  VarName var;
  Term rhs;
};

// Closed-form solution y_x(t) for each ODE variable.
struct SolutionAnnotation {
  VarName time;
  std::vector<std::pair<VarName, Term>> solutions;

  const Term* find(const VarName& v) const;
};

struct ProgramNode {
  ProgramKind kind;
  VarName var;                         // Assign
  Term term;                           // Assign
  Formula formula;                     // Test condition, ODE domain
  std::vector<OdeEquation> equations;  // Ode
  Program left, right;                 // Choice/Seq; Loop body in left
  // Annotations carried by the concrete syntax; ignored by structural_eq.
  std::optional<SolutionAnnotation> solution;  // Ode
  Formula invariant;                           // Loop (may be null)
};

Program make_assign(const VarName& x, Term e);
Program make_test(Formula q);
Program make_ode(std::vector<OdeEquation> eqs, Formula domain,
                 std::optional<SolutionAnnotation> solution = std::nullopt);
Program make_choice(Program a, Program b);
Program make_seq(Program a, Program b);
Program make_loop(Program body, Formula invariant = nullptr);

Program with_solution(const Program& ode, std::optional<SolutionAnnotation> sol);
Program with_invariant(const Program& loop, Formula inv);

// ------------------------------------------------------------- analyses

VarSet free_vars(const Term& t);
// Over-approximation: modal formulas contribute every variable their
// program mentions plus the free variables of the postcondition.
VarSet free_vars(const Formula& f);
// Every variable the program mentions (assigned, read, or evolved).
VarSet free_vars(const Program& p);
VarSet bound_vars(const Program& p);
// All variables occurring anywhere, bound or free.
VarSet all_vars(const Formula& f);
VarSet all_vars(const Program& p);

bool is_quantifier_free(const Formula& f);
bool is_program_free(const Formula& f);
bool has_primed(const Term& t);
bool is_loop_free(const Program& p);

using TermSubst = std::map<VarName, Term>;

// Simultaneous replacement; terms have no binders.
Term substitute(const Term& t, const TermSubst& s);
Term substitute(const Term& t, const VarName& x, const Term& by);

// Replaces free occurrences of each mapped variable. Throws CaptureError
// when a quantifier or program would bind a free variable of a
// replacement at an occurrence that gets replaced.
Formula substitute(const Formula& f, const TermSubst& s);
Formula substitute(const Formula& f, const VarName& x, const Term& by);
Program substitute(const Program& p, const TermSubst& s);

// Structural differential: (c)'=0, (x)'=x', sum, product and power rules.
Term differential(const Term& t);

// Constant folding: literal arithmetic, 0 and 1 units, double negation.
Term simplify(const Term& t);
Formula simplify(const Formula& f);

bool structural_eq(const Term& a, const Term& b);
bool structural_eq(const Formula& a, const Formula& b);
bool structural_eq(const Program& a, const Program& b);

// ------------------------------------------------------------- printing

std::string to_string(const Term& t);
std::string to_string(const Formula& f);
std::string to_string(const Program& p);
std::string to_string(const SolutionAnnotation& s);

// Picks base, base_1, base_2, ... not contained in `taken`.
VarName fresh_var(const std::string& base, const VarSet& taken);

}  // namespace dl
