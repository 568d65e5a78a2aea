#include <gtest/gtest.h>

#include "dl/arith.hpp"
#include "dl/fuzz.hpp"
#include "dl/polynomial.hpp"
#include "test_util.hpp"

using namespace dl;
using dltest::F;
using dltest::Q;
using dltest::T;

namespace {

ArithGoal goal(std::vector<std::string> ante, std::vector<std::string> succ) {
  ArithGoal g;
  for (const auto& a : ante) g.antecedent.push_back(parse_formula(a));
  for (const auto& s : succ) g.succedent.push_back(parse_formula(s));
  return g;
}

SmtConfig z3() {
  SmtConfig c;
  c.path = DLTEST_Z3;
  return c;
}

bool have_z3() { return std::string(DLTEST_Z3).size() > 0 && std::filesystem::exists(DLTEST_Z3); }

// Every Invalid verdict must carry a state that falsifies the goal.
void expect_sound(const ArithGoal& g, const Verdict& v) {
  if (v.kind == VerdictKind::Invalid) EXPECT_FALSE(goal_holds(g, v.counterexample)) << g.to_string();
}

}  // namespace

TEST(Polynomial, Identities) {
  EXPECT_TRUE(poly_zero(T("2*g*v"), T("-2*v*(-g)")));
  EXPECT_TRUE(poly_zero(T("(x+1)^2"), T("x^2+2*x+1")));
  EXPECT_FALSE(poly_zero(T("x*y"), T("y")));
}

TEST(Polynomial, CanonicalFormHasNoZeroCoefficients) {
  Polynomial p = poly_normalize(T("x*y - y*x + 0*z"));
  EXPECT_TRUE(p.is_zero());
  EXPECT_TRUE(p.terms().empty());
}

TEST(Polynomial, RingHomomorphism) {
  FuzzGen gen(21);
  const auto& pool = fuzz_vars();
  for (int i = 0; i < 1000; ++i) {
    Term a = gen.term(3, pool), b = gen.term(3, pool);
    EXPECT_EQ(poly_normalize(make_plus(a, b)), poly_normalize(a) + poly_normalize(b));
    EXPECT_EQ(poly_normalize(make_times(a, b)), poly_normalize(a) * poly_normalize(b));
    EXPECT_EQ(poly_normalize(make_minus(a, b)), poly_normalize(a) - poly_normalize(b));
  }
}

TEST(Polynomial, EvaluationAgreesWithTerms) {
  FuzzGen gen(8);
  const auto& pool = fuzz_vars();
  for (int i = 0; i < 500; ++i) {
    Term t = gen.term(4, pool);
    ExactState s = gen.state();
    Rational direct = eval_term(s, t);
    Rational via = poly_normalize(t).evaluate<Rational>([&](const std::string& k) { return s.at(var_from_key(k)); });
    EXPECT_EQ(direct, via) << to_string(t);
  }
}

TEST(Ground, Examples) {
  EXPECT_EQ(ground_decide(goal({}, {"4*(-1) = 0-4"})).kind, VerdictKind::Valid);
  EXPECT_EQ(ground_decide(goal({}, {"1/3 + 1/6 = 1/2"})).kind, VerdictKind::Valid);
  Verdict v = ground_decide(goal({}, {"2 > 3"}));
  EXPECT_EQ(v.kind, VerdictKind::Invalid);
  EXPECT_TRUE(v.counterexample.empty());
}

TEST(FourierMotzkin, Examples) {
  EXPECT_EQ(fm_decide(goal({"x>=0", "v>=1"}, {"x+v>=1"})).kind, VerdictKind::Valid);
  EXPECT_EQ(fm_decide(goal({"4*x = 4*H - v^2", "x>=0"}, {"x<=H"})).kind, VerdictKind::Valid);
  EXPECT_EQ(fm_decide(goal({"2*g*x = 2*g*H - v^2", "x>=0", "g>0"}, {"x<=H"})).kind, VerdictKind::Unknown);
}

TEST(FourierMotzkin, InvalidCarriesAFalsifyingWitness) {
  ArithGoal g = goal({"x>0"}, {"x>=1"});
  Verdict v = fm_decide(g);
  ASSERT_EQ(v.kind, VerdictKind::Invalid);
  expect_sound(g, v);
}

TEST(FourierMotzkin, ValidVerdictsSurviveRandomStates) {
  // Linear goals built from random bounds; every Valid verdict is checked
  // against many exact states.
  FuzzGen gen(4);
  const auto& pool = fuzz_vars();
  int valid = 0;
  for (int i = 0; i < 300; ++i) {
    ArithGoal g;
    for (int k = 0; k < 3; ++k) {
      Term lhs = make_plus(make_times(make_lit(gen.rational()), make_var(pool[gen.pick(3)])),
                           make_times(make_lit(gen.rational()), make_var(pool[gen.pick(3)])));
      g.antecedent.push_back(make_cmp(FormulaKind::Geq, lhs, make_lit(gen.rational())));
    }
    g.succedent.push_back(make_cmp(FormulaKind::Geq, make_var(pool[gen.pick(3)]), make_lit(gen.rational())));
    Verdict v = fm_decide(g);
    expect_sound(g, v);
    if (v.kind != VerdictKind::Valid) continue;
    ++valid;
    for (int s = 0; s < 10000 / 30; ++s) ASSERT_TRUE(goal_holds(g, gen.state())) << g.to_string();
  }
  EXPECT_GT(valid, 0);
}

TEST(FourierMotzkin, FeasibilityWitness) {
  std::vector<LinearConstraint> cs{
      {{{"x", Q(1)}, {"y", Q(1)}}, Q(-2), Rel::Geq},
      {{{"x", Q(1)}}, Q(0), Rel::Gt},
      {{{"y", Q(-1)}}, Q(1), Rel::Geq},
  };
  auto w = fm_feasible(cs);
  ASSERT_TRUE(w);
  for (const auto& c : cs) EXPECT_TRUE(c.holds(*w));
  cs.push_back({{{"x", Q(-1)}}, Q(0), Rel::Geq});
  EXPECT_FALSE(fm_feasible(cs));
}

TEST(Decide, LayersAndMethods) {
  ArithPolicy off;
  EXPECT_EQ(decide(goal({}, {"1/3+1/6=1/2"}), off).method, "ground");
  EXPECT_EQ(decide(goal({"x>=0"}, {"4*v = -(2*v*(-2))"}), off).method, "poly");
  EXPECT_EQ(decide(goal({"4*x = 4*H - v^2", "x>=0"}, {"x<=H"}), off).method, "fm");
  ArithGoal g = goal({"x>0"}, {"x>=1"});
  Verdict v = decide(g, off);
  ASSERT_EQ(v.kind, VerdictKind::Invalid);
  expect_sound(g, v);
}

TEST(Decide, SymbolicLeafNeedsSmt) {
  ArithGoal g = goal({"2*g*x = 2*g*H - v^2", "x>=0", "g>0"}, {"0<=x & x<=H"});
  EXPECT_EQ(decide(g, ArithPolicy{}).kind, VerdictKind::Unknown);
  if (!have_z3()) GTEST_SKIP() << "no z3 on PATH";
  Verdict v = decide(g, ArithPolicy{z3()});
  EXPECT_EQ(v.kind, VerdictKind::Valid);
  EXPECT_EQ(v.method, "smt");
}

TEST(Smt, Examples) {
  if (!have_z3()) GTEST_SKIP() << "no z3 on PATH";
  EXPECT_EQ(smt_decide(goal({}, {"x^2 >= 0"}), z3()).kind, VerdictKind::Valid);
  ArithGoal g = goal({}, {"x >= 0"});
  Verdict v = smt_decide(g, z3());
  ASSERT_EQ(v.kind, VerdictKind::Invalid);
  expect_sound(g, v);
}

TEST(Smt, MissingSolverBinary) {
  SmtConfig c;
  c.path = "/nonexistent/solver";
  EXPECT_THROW(smt_decide(goal({}, {"x>=0"}), c), SolverUnavailable);
}

TEST(Smt, MalformedOutputIsAProtocolError) {
  EXPECT_THROW(parse_smt_output("bogus\n", {VarName{"x"}}), ProtocolError);
  SmtAnswer a = parse_smt_output("unsat\n", {VarName{"x"}});
  EXPECT_EQ(a.status, SmtStatus::Unsat);
}

TEST(Smt, ScriptShape) {
  std::string s = smt_script(F("!(x>=0)"), {VarName{"x"}});
  EXPECT_NE(s.find("(set-logic QF_NRA)"), std::string::npos);
  EXPECT_NE(s.find("(declare-fun |x| () Real)"), std::string::npos);
  EXPECT_NE(s.find("(check-sat)"), std::string::npos);
}

TEST(Decide, EnablingSmtNeverLosesValidity) {
  if (!have_z3()) GTEST_SKIP() << "no z3 on PATH";
  std::vector<ArithGoal> goals{goal({"x>=0", "v>=1"}, {"x+v>=1"}), goal({"4*x = 4*H - v^2", "x>=0"}, {"x<=H"}),
                               goal({}, {"1/3+1/6=1/2"}), goal({"x>=0"}, {"4*v = -(2*v*(-2))"})};
  for (const auto& g : goals) {
    ASSERT_EQ(decide(g, ArithPolicy{}).kind, VerdictKind::Valid);
    EXPECT_EQ(decide(g, ArithPolicy{z3()}).kind, VerdictKind::Valid);
  }
}
