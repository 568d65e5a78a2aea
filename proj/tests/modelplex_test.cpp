#include <gtest/gtest.h>

#include "dl/fuzz.hpp"
#include "dl/modelplex.hpp"
#include "test_util.hpp"

using namespace dl;
using dltest::F;
using dltest::P;
using dltest::Q;
using dltest::S;

namespace {

// Reference monitors, transcribed by hand; x+ is written x_post.
const char* kReferenceController = "(x=0 & v_post=-v | x>0 & v_post=v) & x_post=x";
const char* kReferenceModel =
    "2*g*(x_post-x)=v^2-v_post^2 & x>=0 & (x_post>0 & v_post<=v | x_post=0 & v_post>=-v)";

LoopModel symbolic_model() {
  return extract_loop_model(parse_model_file(dltest::corpus("bouncing_ball_symbolic.dlm")));
}

VarSet xv() { return {VarName{"x"}, VarName{"v"}}; }

std::vector<Rational> five(std::initializer_list<std::pair<long, long>> v) {
  std::vector<Rational> out;
  for (auto [n, d] : v) out.push_back(Q(n, d));
  return out;
}

GridSpec standard_grid() {
  GridSpec g;
  auto nonneg = five({{0, 1}, {1, 2}, {1, 1}, {3, 2}, {2, 1}});
  auto signed_ = five({{-2, 1}, {-1, 1}, {0, 1}, {1, 1}, {2, 1}});
  g.values[VarName{"x"}] = nonneg;
  g.values[post_var(VarName{"x"})] = nonneg;
  g.values[VarName{"v"}] = signed_;
  g.values[post_var(VarName{"v"})] = signed_;
  g.values[VarName{"g"}] = five({{1, 2}, {1, 1}, {3, 2}, {2, 1}, {4, 1}});
  g.context = F("x>=0 & x_post>=0 & g>0");
  return g;
}

ExactState posts(const ExactState& s) {
  ExactState out;
  for (const auto& [k, v] : s) out[post_var(k)] = v;
  return out;
}

// 2g(x+ - x) = v^2 - (v+)^2, computed directly.
bool energy_matches(const ExactState& prior, const ExactState& post) {
  const Rational& g = prior.at(VarName{"g"});
  Rational lhs = 2 * g * (post.at(post_var(VarName{"x"})) - prior.at(VarName{"x"}));
  Rational vp = post.at(post_var(VarName{"v"}));
  Rational v = prior.at(VarName{"v"});
  return lhs == v * v - vp * vp;
}

Formula all_of(const std::vector<Formula>& fs) {
  Formula out = make_true();
  for (auto it = fs.rbegin(); it != fs.rend(); ++it) out = out->kind == FormulaKind::True ? *it : make_and(*it, out);
  return out;
}

}  // namespace

// ---------------------------------------------------------------- symexec

TEST(Symexec, ControllerPaths) {
  SymContext ctx;
  auto paths = symexec(P("?x=0; v:=-c*v ++ ?x!=0"), ctx);
  ASSERT_EQ(paths.size(), 2u);
  ASSERT_EQ(paths[0].path.size(), 1u);
  EXPECT_TRUE(structural_eq(paths[0].path[0], F("x=0")));
  ASSERT_EQ(paths[0].update.size(), 1u);
  EXPECT_TRUE(structural_eq(paths[0].update.at(VarName{"v"}), dltest::T("-c*v")));
  EXPECT_TRUE(structural_eq(paths[1].path[0], F("x!=0")));
  EXPECT_TRUE(paths[1].update.empty());
}

TEST(Symexec, AssignThenTest) {
  SymContext ctx;
  auto paths = symexec(P("x:=x+1; ?x>0"), ctx);
  ASSERT_EQ(paths.size(), 1u);
  EXPECT_TRUE(structural_eq(paths[0].path[0], F("x+1>0")));
  EXPECT_TRUE(structural_eq(paths[0].update.at(VarName{"x"}), dltest::T("x+1")));
}

TEST(Symexec, OdeIntroducesTimeAndEndpointDomain) {
  SymContext ctx;
  auto paths = symexec(P("{x'=v, v'=-g & x>=0}@solution(t; x=x+v*t-(g/2)*t^2, v=v-g*t)"), ctx);
  ASSERT_EQ(paths.size(), 1u);
  ASSERT_EQ(paths[0].times.size(), 1u);
  VarName t = paths[0].times[0];
  EXPECT_EQ(ctx.taken.count(t), 1u);
  // Evaluate the path condition and update at a sample instead of matching syntax.
  ExactState s = S({{"x", Q(1)}, {"v", Q(0)}, {"g", Q(2)}});
  s[t] = Q(1, 2);
  for (const auto& c : paths[0].path) EXPECT_TRUE(holds_qf(s, c)) << to_string(c);
  EXPECT_EQ(eval_term(s, paths[0].update.at(VarName{"x"})), Q(3, 4));
  EXPECT_EQ(eval_term(s, paths[0].update.at(VarName{"v"})), Q(-1));
  s[t] = Q(2);  // x(2) = 1 - 4 < 0 violates the domain at the endpoint
  bool all = true;
  for (const auto& c : paths[0].path) all &= holds_qf(s, c);
  EXPECT_FALSE(all);
}

TEST(Symexec, Errors) {
  SymContext ctx;
  try {
    symexec(P("{x:=x+1}*"), ctx);
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.kind(), "LoopNotSupported");
  }
  EXPECT_THROW(symexec(P("{x'=x}"), ctx), MissingSolution);
}

// ----------------------------------------------------------- eliminate_time

TEST(EliminateTime, BouncingBallRelation) {
  std::vector<Formula> rel{F("x_post=x+v*t-(g/2)*t^2"), F("v_post=v-g*t"), F("t>=0"), F("x>=0"),
                           F("x+v*t-(g/2)*t^2>=0")};
  auto out = eliminate_time(rel, VarName{"t"}, {F("g>0")});
  Formula f = all_of(out);
  for (const auto& c : out) EXPECT_EQ(free_vars(c).count(VarName{"t"}), 0u) << to_string(c);
  Formula expected = F("2*g*(x_post-x)=v^2-v_post^2 & v_post<=v & x>=0 & x_post>=0");
  GridSpec g = standard_grid();
  EquivResult r = monitor_equiv(f, expected, g);
  EXPECT_TRUE(r.equivalent) << to_string(f);
}

TEST(EliminateTime, PreservesSatisfactionOnGridWitnesses) {
  std::vector<Formula> rel{F("x_post=x+v*t-(g/2)*t^2"), F("v_post=v-g*t"), F("t>=0"), F("x>=0"),
                           F("x+v*t-(g/2)*t^2>=0")};
  Formula after = all_of(eliminate_time(rel, VarName{"t"}, {F("g>0")}));
  Formula before = all_of(rel);
  auto vals = five({{-1, 1}, {0, 1}, {1, 2}, {1, 1}, {2, 1}});
  int witnessed = 0;
  for (const auto& x : vals)
    for (const auto& v : vals)
      for (const auto& g : five({{1, 2}, {1, 1}, {2, 1}, {3, 1}, {4, 1}}))
        for (const auto& t : five({{0, 1}, {1, 4}, {1, 2}, {1, 1}, {2, 1}})) {
          ExactState s{{VarName{"x"}, x}, {VarName{"v"}, v}, {VarName{"g"}, g}, {VarName{"t"}, t}};
          s[post_var(VarName{"x"})] = x + v * t - g / 2 * t * t;
          s[post_var(VarName{"v"})] = v - g * t;
          ASSERT_EQ(holds_qf(s, before), holds_qf(s, after)) << x << " " << v << " " << g << " " << t;
          witnessed += holds_qf(s, before);
        }
  EXPECT_GT(witnessed, 0);
}

TEST(EliminateTime, Clock) {
  auto out = eliminate_time({F("x_post=x+t"), F("t>=0")}, VarName{"t"}, {});
  Formula f = all_of(out);
  GridSpec g;
  g.values[VarName{"x"}] = five({{-1, 1}, {0, 1}, {1, 2}, {1, 1}, {2, 1}});
  g.values[post_var(VarName{"x"})] = g.values[VarName{"x"}];
  EXPECT_TRUE(monitor_equiv(f, F("x_post>=x"), g).equivalent) << to_string(f);
}

TEST(EliminateTime, Errors) {
  try {
    eliminate_time({F("x_post=x+t^2"), F("t>=0")}, VarName{"t"}, {});
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.kind(), "NotLinearInTime");
  }
  try {
    eliminate_time({F("v_post=v-g*t"), F("t>=0")}, VarName{"t"}, {});
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.kind(), "AmbiguousCoefficientSign");
  }
}

// --------------------------------------------------------------- synthesis

TEST(ControllerMonitor, BouncingBall) {
  Monitor m = synth_controller_monitor(P("?x=0; v:=-1*v ++ ?x!=0"), xv());
  EXPECT_EQ(m.kind, Monitor::Kind::Controller);
  EXPECT_TRUE(is_quantifier_free(m.formula));
  GridSpec g;
  auto vals = five({{-1, 1}, {0, 1}, {1, 2}, {1, 1}, {2, 1}});
  for (const char* n : {"x", "v", "x_post", "v_post"}) g.values[var_from_key(n)] = vals;
  g.context = F("x>=0");
  EquivResult with = monitor_equiv(m.formula, F(kReferenceController), g);
  EXPECT_TRUE(with.equivalent);
  EXPECT_EQ(with.evaluated, 4u * 125u);

  g.context = nullptr;
  EquivResult without = monitor_equiv(m.formula, F(kReferenceController), g);
  ASSERT_FALSE(without.equivalent);
  EXPECT_EQ(without.mismatch.at(VarName{"x"}), Q(-1));
}

TEST(ControllerMonitor, ChoiceOfAssignments) {
  Monitor m = synth_controller_monitor(P("v:=A ++ v:=-B"), xv());
  GridSpec g;
  auto vals = five({{-1, 1}, {0, 1}, {1, 2}, {1, 1}, {2, 1}});
  for (const char* n : {"x", "v", "x_post", "v_post", "A", "B"}) g.values[var_from_key(n)] = vals;
  EXPECT_TRUE(monitor_equiv(m.formula, F("(v_post=A | v_post=-B) & x_post=x"), g).equivalent);
}

TEST(ControllerMonitor, FalseTest) {
  Monitor m = synth_controller_monitor(P("?false"), xv());
  GridSpec g;
  for (const char* n : {"x", "v", "x_post", "v_post"}) g.values[var_from_key(n)] = {Q(0), Q(1)};
  EXPECT_TRUE(monitor_equiv(m.formula, F("false"), g).equivalent);
}

TEST(ModelMonitor, MatchesReferenceFormula) {
  LoopModel lm = symbolic_model();
  Monitor m = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions);
  EXPECT_EQ(m.kind, Monitor::Kind::Model);
  EXPECT_TRUE(m.warnings.empty());
  EquivResult r = monitor_equiv(m.formula, F(kReferenceModel), standard_grid());
  EXPECT_TRUE(r.equivalent) << to_string(m.formula);
  EXPECT_EQ(r.evaluated, 3125u);
}

TEST(ModelMonitor, LoopInBodyIsRejected) {
  try {
    synth_model_monitor(P("{x:=x+1}*; ?x>0"), {VarName{"x"}}, {});
    FAIL();
  } catch (const SynthesisError& e) {
    EXPECT_EQ(e.kind(), "LoopNotSupported");
  }
}

TEST(ModelMonitor, ClockBody) {
  Monitor m = synth_model_monitor(P("{x'=1}@solution(t; x=x+t)"), {VarName{"x"}}, {});
  GridSpec g;
  g.values[VarName{"x"}] = five({{-1, 1}, {0, 1}, {1, 2}, {1, 1}, {2, 1}});
  g.values[post_var(VarName{"x"})] = g.values[VarName{"x"}];
  EXPECT_TRUE(monitor_equiv(m.formula, F("x_post>=x"), g).equivalent) << to_string(m.formula);
}

TEST(ModelMonitor, DomainWithoutConcavityWarns) {
  Monitor m = synth_model_monitor(P("{x'=v, v'=g & x>=0}@solution(t; x=x+v*t+(g/2)*t^2, v=v+g*t)"), xv(), {F("g>0")});
  EXPECT_FALSE(m.warnings.empty());
}

// ------------------------------------------------------------- evaluation

TEST(EvalMonitor, Examples) {
  Formula ctrl = F(kReferenceController);
  EXPECT_TRUE(eval_monitor(ctrl, S({{"x", Q(0)}, {"v", Q(-2)}}), S({{"x_post", Q(0)}, {"v_post", Q(2)}})));
  Formula model = F(kReferenceModel);
  ExactState prior = S({{"x", Q(1)}, {"v", Q(0)}, {"g", Q(2)}, {"H", Q(1)}});
  EXPECT_TRUE(eval_monitor(model, prior, S({{"x_post", Q(0)}, {"v_post", Q(2)}})));
  EXPECT_FALSE(eval_monitor(model, prior, S({{"x_post", Q(0)}, {"v_post", Q(1)}})));

  LoopModel lm = symbolic_model();
  Formula synth = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  EXPECT_TRUE(eval_monitor(synth, prior, S({{"x_post", Q(0)}, {"v_post", Q(2)}})));
  EXPECT_FALSE(eval_monitor(synth, prior, S({{"x_post", Q(0)}, {"v_post", Q(1)}})));
  EXPECT_THROW(eval_monitor(synth, S({{"x", Q(1)}}), S({{"x_post", Q(0)}, {"v_post", Q(1)}})), MissingVariable);
}

TEST(MonitorEquiv, SelfAndParallelAgreement) {
  LoopModel lm = symbolic_model();
  Formula synth = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  GridSpec g = standard_grid();
  EXPECT_TRUE(monitor_equiv(synth, synth, g).equivalent);

  g.context = nullptr;
  g.values[VarName{"g"}] = five({{-1, 1}, {0, 1}, {1, 1}, {2, 1}, {4, 1}});
  Formula other = F(kReferenceModel);
  EquivResult par = monitor_equiv(synth, other, g);
  EquivResult ser = monitor_equiv_serial(synth, other, g);
  EXPECT_EQ(par.equivalent, ser.equivalent);
  EXPECT_EQ(par.evaluated, ser.evaluated);
  EXPECT_EQ(par.mismatch, ser.mismatch);
}

// ------------------------------------------------------------- properties

TEST(TransitionSoundness, ModelMonitorAcceptsSimulatedTransitions) {
  LoopModel lm = symbolic_model();
  Formula monitor = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  EnumBudget b;
  b.time_grid = {0, Q(1, 8), Q(1, 4), Q(1, 2), Q(3, 4), Q(1), Q(3, 2)};
  FuzzGen gen(1234);
  size_t transitions = 0;
  while (transitions < 1000) {
    ExactState prior{{VarName{"x"}, abs(gen.rational())},
                     {VarName{"v"}, gen.rational()},
                     {VarName{"g"}, abs(gen.rational()) + Q(1, 4)},
                     {VarName{"H"}, gen.rational()}};
    if (gen.pick(3) == 0) prior[VarName{"x"}] = 0;
    for (const auto& post : reachable_states(lm.body, prior, b)) {
      ExactState p = posts(ExactState{{VarName{"x"}, post.at(VarName{"x"})}, {VarName{"v"}, post.at(VarName{"v"})}});
      ASSERT_TRUE(eval_monitor(monitor, prior, p));
      ++transitions;
    }
  }
}

TEST(TransitionSoundness, EnergyViolatingPerturbationsAreRejected) {
  LoopModel lm = symbolic_model();
  Formula monitor = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  EnumBudget b;
  FuzzGen gen(77);
  std::vector<Rational> offsets{Q(-1), Q(-1, 3), Q(0), Q(1, 7), Q(1, 2), Q(2)};
  size_t rejected = 0;
  for (int i = 0; i < 100; ++i) {
    ExactState prior{{VarName{"x"}, abs(gen.rational())},
                     {VarName{"v"}, gen.rational()},
                     {VarName{"g"}, abs(gen.rational()) + Q(1, 4)},
                     {VarName{"H"}, Q(0)}};
    for (const auto& post : reachable_states(lm.body, prior, b)) {
      for (const auto& dx : offsets)
        for (const auto& dv : offsets) {
          ExactState p = posts(
              ExactState{{VarName{"x"}, post.at(VarName{"x"}) + dx}, {VarName{"v"}, post.at(VarName{"v"}) + dv}});
          if (energy_matches(prior, p)) continue;
          ASSERT_FALSE(eval_monitor(monitor, prior, p));
          ++rejected;
        }
    }
  }
  EXPECT_GT(rejected, 1000u);
}

TEST(ControllerCompleteness, MonitorAndSimulatorAgreeOnGrid) {
  LoopModel lm = symbolic_model();
  Formula monitor = synth_controller_monitor(lm.ctrl, lm.state_vars).formula;
  EnumBudget b;
  auto vals = five({{-2, 1}, {-1, 1}, {0, 1}, {1, 2}, {2, 1}});
  for (const auto& x : vals)
    for (const auto& v : vals) {
      ExactState prior{{VarName{"x"}, x}, {VarName{"v"}, v}};
      auto succ = reachable_states(lm.ctrl, prior, b);
      for (const auto& s : succ) EXPECT_TRUE(eval_monitor(monitor, prior, posts(s)));
      for (const auto& xp : vals)
        for (const auto& vp : vals) {
          ExactState candidate{{VarName{"x"}, xp}, {VarName{"v"}, vp}};
          EXPECT_EQ(eval_monitor(monitor, prior, posts(candidate)), succ.count(candidate) > 0);
        }
    }
}

// ---------------------------------------------------------- compiled form

TEST(CompiledMonitor, AgreesWithInterpreter) {
  LoopModel lm = symbolic_model();
  std::vector<Formula> monitors{synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula,
                                synth_controller_monitor(lm.ctrl, lm.state_vars).formula, F(kReferenceModel),
                                F("!(x<1) | x^3>v & true"), F("false")};
  FuzzGen gen(9);
  for (const auto& m : monitors) {
    auto ops = compile_monitor(m);
    auto again = parse_ops(serialize_ops(ops));
    EXPECT_EQ(serialize_ops(again), serialize_ops(ops));
    for (int i = 0; i < 500; ++i) {
      ExactState s{{VarName{"x"}, gen.rational()},
                   {VarName{"v"}, gen.rational()},
                   {VarName{"g"}, gen.rational()},
                   {post_var(VarName{"x"}), gen.rational()},
                   {post_var(VarName{"v"}), gen.rational()}};
      if (i % 5 == 0) s[post_var(VarName{"v"})] = -s[VarName{"v"}];
      if (i % 7 == 0) s[VarName{"x"}] = 0;
      ASSERT_EQ(run_ops(again, s), holds_qf(s, m)) << to_string(m);
    }
  }
}

TEST(CompiledMonitor, TextFormat) {
  auto ops = compile_monitor(F("x>=1/2 & !(v=0)"));
  std::string text = serialize_ops(ops);
  EXPECT_NE(text.find("LOAD x\n"), std::string::npos);
  EXPECT_NE(text.find("CONST 1/2\n"), std::string::npos);
  EXPECT_NE(text.find("GE\n"), std::string::npos);
  EXPECT_NE(text.find("NOT\n"), std::string::npos);
  EXPECT_THROW(parse_ops("LOAD x\nJUMP 3\n"), SyntaxError);
}
