#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "dl/fuzz.hpp"
#include "dl/model_file.hpp"
#include "test_util.hpp"

using namespace dl;
using dltest::F;
using dltest::P;
using dltest::Q;
using dltest::S;
using dltest::T;

namespace {

const char* kFall = "{x'=v, v'=-g}@solution(t; x=x+v*t-(g/2)*t^2, v=v-g*t)";
const char* kFallDomain = "{x'=v, v'=-g & x>=0}@solution(t; x=x+v*t-(g/2)*t^2, v=v-g*t)";

// Closed form of the free fall, written out independently of the parser.
std::pair<double, double> fall(double x0, double v0, double g, double t) {
  return {x0 + v0 * t - g / 2 * t * t, v0 - g * t};
}

}  // namespace

TEST(EvalTerm, Examples) {
  EXPECT_EQ(eval_term(S({{"x", 3}, {"v", 2}}), T("2*x+v")), Q(8));
  EXPECT_EQ(eval_term(S({{"g", 2}, {"x", 1}, {"H", 1}, {"v", 0}}), T("2*g*H - v^2")), Q(4));
  EXPECT_EQ(eval_term(ExactState{}, T("(1/3)*3")), Q(1));
}

TEST(EvalTerm, MissingVariable) { EXPECT_THROW(eval_term(S({{"x", 1}}), T("x+y")), MissingVariable); }

TEST(HoldsQf, Examples) {
  EXPECT_TRUE(holds_qf(S({{"x", 0}, {"v", -2}}), F("x=0 & v<=0")));
  EXPECT_TRUE(holds_qf(S({{"x", 1}, {"v", 0}, {"g", 2}, {"H", 1}}), F("2*g*x=2*g*H-v^2 & x>=0")));
  EXPECT_FALSE(holds_qf(S({{"x", -1}}), F("x>=0")));
}

TEST(HoldsQf, RejectsQuantifiers) { EXPECT_THROW(holds_qf(S({{"x", 1}}), F("\\forall y y>=x")), NotQuantifierFree); }

TEST(IntegrateOde, Rk4MatchesClosedForm) {
  FloatState s{{VarName{"x"}, 1.0}, {VarName{"v"}, 0.0}, {VarName{"g"}, 2.0}};
  auto run = integrate_ode(s, P(kFall), 1.0, OdeMode::Rk4, 1e-3);
  ASSERT_FALSE(run.violation);
  auto [x, v] = fall(1, 0, 2, 1);
  EXPECT_NEAR(run.final_state().at(VarName{"x"}), x, 1e-6);
  EXPECT_NEAR(run.final_state().at(VarName{"v"}), v, 1e-6);
}

TEST(IntegrateOde, Rk4ErrorAlongTheTrajectory) {
  FloatState s{{VarName{"x"}, 1.0}, {VarName{"v"}, 0.0}, {VarName{"g"}, 2.0}};
  auto run = integrate_ode(s, P(kFall), 1.0, OdeMode::Rk4, 1e-3);
  for (const auto& [t, st] : run.trace.samples) {
    auto [x, v] = fall(1, 0, 2, t);
    ASSERT_NEAR(st.at(VarName{"x"}), x, 1e-6) << t;
    ASSERT_NEAR(st.at(VarName{"v"}), v, 1e-6) << t;
  }
}

TEST(IntegrateOde, ClosedFormIsExact) {
  ExactState s = S({{"x", 1}, {"v", 0}, {"g", 2}});
  auto run = integrate_ode(s, P(kFall), Q(1), OdeMode::ClosedForm, Q(1, 8));
  ASSERT_FALSE(run.violation);
  for (const auto& [t, st] : run.trace.samples) {
    EXPECT_EQ(st.at(VarName{"x"}), 1 - t * t);
    EXPECT_EQ(st.at(VarName{"v"}), -2 * t);
    EXPECT_EQ(st.at(var_from_key("x'")), st.at(VarName{"v"}));
    EXPECT_EQ(st.at(var_from_key("v'")), Q(-2));
  }
  EXPECT_EQ(run.final_state().at(VarName{"x"}), Q(0));
  EXPECT_EQ(run.final_state().at(VarName{"v"}), Q(-2));
}

TEST(IntegrateOde, Rk4IsExactOnRationalsForThisPolynomialFlow) {
  // Classical RK4 integrates quadratics without truncation error, so in
  // exact arithmetic it reproduces the closed form bit for bit.
  ExactState s = S({{"x", 1}, {"v", 0}, {"g", 2}});
  auto run = integrate_ode(s, P(kFall), Q(1), OdeMode::Rk4, Q(1, 10));
  EXPECT_EQ(run.final_state().at(VarName{"x"}), Q(0));
  EXPECT_EQ(run.final_state().at(VarName{"v"}), Q(-2));
}

TEST(IntegrateOde, DomainViolationAtTheGroundCrossing) {
  ExactState s = S({{"x", 1}, {"v", 0}, {"g", 2}});
  auto run = integrate_ode(s, P(kFallDomain), Q(2), OdeMode::ClosedForm, Q(1, 100));
  ASSERT_TRUE(run.violation);
  EXPECT_EQ(*run.violation, Q(101, 100));
  EXPECT_EQ(run.trace.samples.back().first, Q(1));

  FloatState fs{{VarName{"x"}, 1.0}, {VarName{"v"}, 0.0}, {VarName{"g"}, 2.0}};
  auto frun = integrate_ode(fs, P(kFallDomain), 2.0, OdeMode::Rk4, 1e-3);
  ASSERT_TRUE(frun.violation);
  EXPECT_NEAR(*frun.violation, 1.0, 2e-3);
}

TEST(IntegrateOde, DomainFalseInitially) {
  auto run = integrate_ode(S({{"x", -1}, {"v", 0}, {"g", 2}}), P(kFallDomain), Q(1), OdeMode::ClosedForm, Q(1, 4));
  ASSERT_TRUE(run.violation);
  EXPECT_EQ(*run.violation, Q(0));
  EXPECT_TRUE(run.trace.samples.empty());
}

TEST(IntegrateOde, ZeroDuration) {
  auto run = integrate_ode(S({{"x", 1}, {"v", 0}, {"g", 2}}), P(kFallDomain), Q(0), OdeMode::ClosedForm, Q(1, 4));
  ASSERT_FALSE(run.violation);
  ASSERT_EQ(run.trace.samples.size(), 1u);
  EXPECT_EQ(run.trace.samples[0].first, Q(0));
}

TEST(IntegrateOde, ClosedFormNeedsAnnotation) {
  EXPECT_THROW(integrate_ode(S({{"x", 1}}), P("{x'=1}"), Q(1), OdeMode::ClosedForm, Q(1, 4)), MissingSolution);
}

TEST(Reachable, ControllerBranches) {
  Program ctrl = P("?x=0; v:=-c*v ++ ?x!=0");
  EnumBudget b;
  EXPECT_EQ(reachable_states(ctrl, S({{"x", 0}, {"v", -2}, {"c", 1}}), b),
            (std::set<ExactState>{S({{"x", 0}, {"v", 2}, {"c", 1}})}));
  EXPECT_EQ(reachable_states(ctrl, S({{"x", 5}, {"v", -2}, {"c", 1}}), b),
            (std::set<ExactState>{S({{"x", 5}, {"v", -2}, {"c", 1}})}));
}

TEST(Reachable, LoopBound) {
  EnumBudget b;
  b.loop_bound = 3;
  auto out = reachable_states(P("{x:=x+1}*"), S({{"x", 0}}), b);
  std::set<ExactState> expected;
  for (int i = 0; i <= 3; ++i) expected.insert(S({{"x", i}}));
  EXPECT_EQ(out, expected);
}

TEST(Reachable, BudgetExceeded) {
  EnumBudget b;
  b.loop_bound = 12;
  b.state_cap = 100;
  EXPECT_THROW(reachable_states(P("{x:=x+1 ++ x:=2*x}*"), S({{"x", 1}}), b), BudgetExceeded);
}

TEST(Reachable, OdeStopsOnGridWhileDomainHolds) {
  EnumBudget b;
  b.time_grid = {Q(0), Q(1, 2), Q(1), Q(3, 2)};
  auto out = reachable_states(P(kFallDomain), S({{"x", 1}, {"v", 0}, {"g", 2}}), b);
  std::set<ExactState> expected{S({{"x", 1}, {"v", 0}, {"g", 2}}), S({{"x", Q(3, 4)}, {"v", -1}, {"g", 2}}),
                                S({{"x", 0}, {"v", -2}, {"g", 2}})};
  EXPECT_EQ(out, expected);
}

TEST(Reachable, CompositionChoiceAndLoopLaws) {
  FuzzGen gen(99);
  EnumBudget b;
  for (int i = 0; i < 200; ++i) {
    Program a = gen.program(3), c = gen.program(3);
    if (!is_loop_free(a) || !is_loop_free(c)) continue;
    ExactState s = gen.state();
    std::set<ExactState> seq;
    for (const auto& m : reachable_states(a, s, b)) seq.merge(reachable_states(c, m, b));
    EXPECT_EQ(reachable_states(make_seq(a, c), s, b), seq) << to_string(a) << " ; " << to_string(c);

    auto ca = reachable_states(a, s, b);
    ca.merge(reachable_states(c, s, b));
    EXPECT_EQ(reachable_states(make_choice(a, c), s, b), ca);

    EnumBudget more = b;
    more.loop_bound = b.loop_bound + 1;
    auto small = reachable_states(make_loop(a), s, b);
    auto big = reachable_states(make_loop(a), s, more);
    EXPECT_TRUE(std::includes(big.begin(), big.end(), small.begin(), small.end()));
  }
}

TEST(CheckBox, InvariantPreservedByTheLoopBody) {
  ModelFile m = parse_model_file(dltest::corpus("bouncing_ball_g2.dlm"));
  Formula f = specialize(m);
  Program body = f->right->program->left;
  EnumBudget b;
  EXPECT_TRUE(check_box(body, S({{"x", 1}, {"v", 0}, {"H", 1}}), F("2*2*x=2*2*H-v^2 & x>=0"), b));
  EXPECT_TRUE(check_box(body, S({{"x", 1}, {"v", 0}, {"g", 2}, {"H", 1}, {"c", 1}}),
                        F("2*g*x=2*g*H-v^2 & x>=0"), b));
}

TEST(CheckBox, Duality) {
  ExactState s = S({{"x", 0}});
  EnumBudget b;
  EXPECT_FALSE(check_diamond(P("?false"), s, F("true"), b));
  EXPECT_FALSE(check_box(P("x:=1 ++ x:=2"), s, F("x=1"), b));
  EXPECT_TRUE(check_diamond(P("x:=1 ++ x:=2"), s, F("x=1"), b));
}

TEST(Simulate, CsvHeaderAndRows) {
  Trace<Rational> tr = simulate(P("{x:=x+1}*"), S({{"x", 0}}), SimOptions{3, Q(1, 5), Q(1, 10), OdeMode::Rk4});
  std::ostringstream os;
  write_trace_csv(os, tr);
  std::string out = os.str();
  EXPECT_EQ(out.substr(0, out.find('\n')), "t,x");
  EXPECT_NE(out.find("3"), std::string::npos);
}

TEST(AxiomFuzz, SoundAxiomsHaveNoCounterexample) {
  for (const auto& a : axiom_names()) {
    FuzzReport r = axiom_fuzz(a, 300, 7);
    EXPECT_FALSE(r.counterexample) << a << ": " << r.counterexample->instance;
    EXPECT_EQ(r.cases, 300u);
  }
}

TEST(AxiomFuzz, MutantsAreRefuted) {
  for (const auto& a : mutant_names()) {
    FuzzReport r = axiom_fuzz(a, 1000, 7);
    ASSERT_TRUE(r.counterexample) << a;
    FuzzInstance inst = make_instance(a, 7 + r.counterexample->case_index);
    EXPECT_TRUE(check_instance(inst, r.counterexample->case_index)) << a;
  }
}

TEST(AxiomFuzz, ParallelAgreesWithSerial) {
  for (const auto& a : mutant_names()) {
    FuzzReport par = axiom_fuzz(a, 400, 3), ser = axiom_fuzz_serial(a, 400, 3);
    ASSERT_EQ(par.counterexample.has_value(), ser.counterexample.has_value()) << a;
    if (par.counterexample) EXPECT_EQ(par.counterexample->case_index, ser.counterexample->case_index) << a;
  }
  FuzzReport par = axiom_fuzz("[;]", 200, 5), ser = axiom_fuzz_serial("[;]", 200, 5);
  EXPECT_EQ(par.cases, ser.cases);
  EXPECT_EQ(par.skipped, ser.skipped);
}

TEST(AxiomFuzz, SequenceOrderMutantOnTheDistinguishingProgram) {
  // [x:=1; x:=2] x=2 holds while [x:=2][x:=1] x=2 does not.
  ExactState s = S({{"x", 0}});
  EnumBudget b;
  Program a = P("x:=1"), c = P("x:=2");
  EXPECT_TRUE(check_box(make_seq(a, c), s, F("x=2"), b));
  EXPECT_FALSE(holds(s, make_box(c, make_box(a, F("x=2"))), b));
}
