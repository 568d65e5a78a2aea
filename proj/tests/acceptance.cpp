// Acceptance run over the bouncing-ball corpus. Prints one PASS/FAIL line
// per criterion and exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include "dl/fuzz.hpp"
#include "dl/kernel.hpp"
#include "dl/model_file.hpp"
#include "dl/modelplex.hpp"
#include "dl/polynomial.hpp"
#include "dl/proof_script.hpp"
#include "dl/sandbox.hpp"
#include "test_util.hpp"

using namespace dl;
using dltest::F;
using dltest::Q;

namespace {

// Pinned limits.
constexpr double kProofSeconds = 5.0;
constexpr size_t kProofSteps = 80;
constexpr size_t kFuzzCases = 1000;
constexpr uint64_t kFuzzSeed = 7;
constexpr double kFuzzSeconds = 60.0;
constexpr double kRk4Step = 1e-3;
constexpr double kRk4Tolerance = 1e-6;
constexpr size_t kMonitorGridPoints = 3000;
constexpr size_t kSoundnessTransitions = 1000;
constexpr size_t kScenarioCycles = 50;
constexpr double kScenarioSeconds = 10.0;
constexpr size_t kRoundtripCases = 1000;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Check {
  bool ok = true;
  std::ostringstream why;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) why << "; ";
      why << what;
      ok = false;
    }
  }
};

Sequent seq(std::vector<std::string> ante, std::vector<std::string> succ) {
  Sequent s;
  for (const auto& a : ante) s.antecedent.push_back(F(a));
  for (const auto& f : succ) s.succedent.push_back(F(f));
  return s;
}

ModelFile model(const char* name) { return parse_model_file(dltest::corpus(name)); }

ExactState posts(const ExactState& s) {
  ExactState out;
  for (const auto& [k, v] : s)
    if (k == VarName{"x"} || k == VarName{"v"}) out[post_var(k)] = v;
  return out;
}

bool have_z3() { return std::string(DLTEST_Z3).size() > 0 && std::filesystem::exists(DLTEST_Z3); }

// ---------------------------------------------------------------- criteria

std::string c1_literal_proof(Check& c) {
  auto start = Clock::now();
  std::vector<GoalNode> tree;
  ProofResult r = check_proof(model("bouncing_ball_g2.dlm"), load_proof_script(dltest::corpus("bouncing_ball_g2.dlproof")),
                              ClosePolicy{}, &tree);
  double secs = since(start);
  c.require(r.kind == ResultKind::Closed, "result is not Closed");
  c.require(r.arith_methods.count("smt") == 0, "SMT was used");
  c.require(secs <= kProofSeconds, "too slow");
  c.require(r.steps <= kProofSteps, "too many rule applications");

  auto node = [&](const Sequent& s) -> const GoalNode* {
    for (const auto& n : tree)
      if (n.sequent == s) return &n;
    return nullptr;
  };
  const char* j = "4*x=4*H-v^2 & x>=0";
  c.require(node(seq({"0<=x", "x=H", "v=0", "2>0", "1=1"}, {j})), "init premise missing");
  c.require(node(seq({j}, {"0<=x & x<=H"})), "use premise missing");
  bool step = false;
  for (const auto& n : tree)
    step |= n.rule == "loop" && n.sequent.antecedent.size() == 1 && structural_eq(n.sequent.antecedent[0], F(j)) &&
            n.sequent.succedent.size() == 1 && n.sequent.succedent[0]->kind == FormulaKind::Box;
  c.require(step, "step premise missing");

  // The leaf x>=0 |- 4v = -2v(-2), decided again outside the kernel.
  Sequent leaf = seq({"x>=0"}, {"4*v=-(2*v*(-2))"});
  const GoalNode* di = nullptr;
  for (const auto& n : tree)
    if (n.rule == "dI" && n.sequent.antecedent.size() == 1 && structural_eq(n.sequent.antecedent[0], F("x>=0")) &&
        n.sequent.succedent.size() == 1 && poly_zero(n.sequent.succedent[0]->lhs, leaf.succedent[0]->lhs) &&
        poly_zero(n.sequent.succedent[0]->rhs, leaf.succedent[0]->rhs))
      di = &n;
  c.require(di && di->status == "closed", "dI leaf missing or open");
  if (di) {
    ArithGoal g{di->sequent.antecedent, di->sequent.succedent};
    c.require(decide(g, ArithPolicy{}).method == "poly", "dI leaf is not closed by polynomial normalization");
  }
  std::ostringstream out;
  out << "steps=" << r.steps << " time=" << secs << "s";
  return out.str();
}

std::string c2_symbolic_proof(Check& c) {
  ModelFile m = model("bouncing_ball_symbolic.dlm");
  auto script = load_proof_script(dltest::corpus("bouncing_ball_symbolic.dlproof"));
  ClosePolicy permissive;
  permissive.permissive = true;
  ProofResult assumed = check_proof(m, script, permissive);
  c.require(assumed.kind == ResultKind::OracleAssumed, "permissive result is not OracleAssumed");
  c.require(assumed.oracle_assumed.size() == 1, "expected exactly one assumed sequent");
  if (assumed.oracle_assumed.size() == 1)
    c.require(assumed.oracle_assumed[0].sequent == seq({"2*g*x=2*g*H-v^2", "x>=0", "g>0"}, {"x<=H"}),
              "assumed sequent is not j |- B");
  c.require(have_z3(), "no SMT solver available");
  if (!have_z3()) return "";
  ClosePolicy smt;
  smt.arith.smt.path = DLTEST_Z3;
  ProofResult closed = check_proof(m, script, smt);
  c.require(closed.kind == ResultKind::Closed, "result with SMT is not Closed");
  return "assumed=" + std::to_string(assumed.oracle_assumed.size());
}

std::string c3_axiom_fuzz(Check& c) {
  auto start = Clock::now();
  size_t cases = 0;
  for (const auto& a : axiom_names()) {
    FuzzReport r = axiom_fuzz(a, kFuzzCases, kFuzzSeed);
    cases += r.cases;
    c.require(!r.counterexample, a + " has a counterexample");
  }
  for (const auto& a : mutant_names()) {
    FuzzReport r = axiom_fuzz(a, kFuzzCases, kFuzzSeed);
    c.require(r.counterexample.has_value(), a + " was not refuted");
    if (!r.counterexample) continue;
    // The counterexample must falsify the instance when evaluated directly.
    FuzzInstance inst = make_instance(a, kFuzzSeed + r.counterexample->case_index);
    c.require(!holds(inst.state, inst.formula(), inst.budget), a + " counterexample does not reproduce");
  }
  double secs = since(start);
  c.require(secs <= kFuzzSeconds, "too slow");
  std::ostringstream out;
  out << axiom_names().size() << " schemata, " << cases << " cases, " << mutant_names().size()
      << " mutants, time=" << secs << "s";
  return out.str();
}

std::string c4_simulator(Check& c) {
  Program ode = parse_program("{x'=v, v'=-g}@solution(t; x=x+v*t-(g/2)*t^2, v=v-g*t)");
  // x(t) = x0 + v0 t - (g/2) t^2 and v(t) = v0 - g t with g=2, x0=1, v0=0.
  auto x_at = [](double t) { return 1.0 - t * t; };
  auto v_at = [](double t) { return -2.0 * t; };
  State<double> s{{VarName{"x"}, 1.0}, {VarName{"v"}, 0.0}, {VarName{"g"}, 2.0}};
  OdeRun<double> rk = integrate_ode(s, ode, 1.0, OdeMode::Rk4, kRk4Step);
  double ex = std::abs(rk.final_state().at(VarName{"x"}) - x_at(1.0));
  double ev = std::abs(rk.final_state().at(VarName{"v"}) - v_at(1.0));
  c.require(ex <= kRk4Tolerance && ev <= kRk4Tolerance, "rk4 error above tolerance");

  ExactState e{{VarName{"x"}, Q(1)}, {VarName{"v"}, Q(0)}, {VarName{"g"}, Q(2)}};
  OdeRun<Rational> cf = integrate_ode(e, ode, Rational(1), OdeMode::ClosedForm, Rational(1, 10));
  c.require(cf.final_state().at(VarName{"x"}) == 0 && cf.final_state().at(VarName{"v"}) == -2,
            "closed form is not exact");
  std::ostringstream out;
  out << "rk4 |dx|=" << ex << " |dv|=" << ev << ", closed form exact";
  return out.str();
}

GridSpec monitor_grid() {
  GridSpec g;
  auto set = [&](const char* n, std::initializer_list<std::pair<long, long>> vs) {
    for (auto [a, b] : vs) g.values[var_from_key(n)].push_back(Q(a, b));
  };
  set("x", {{0, 1}, {1, 2}, {1, 1}, {3, 2}, {2, 1}});
  set("x_post", {{0, 1}, {1, 2}, {1, 1}, {3, 2}, {2, 1}});
  set("v", {{-2, 1}, {-1, 1}, {0, 1}, {1, 1}, {2, 1}});
  set("v_post", {{-2, 1}, {-1, 1}, {0, 1}, {1, 1}, {2, 1}});
  set("g", {{1, 2}, {1, 1}, {3, 2}, {2, 1}, {4, 1}});
  set("c", {{1, 2}, {1, 1}, {3, 2}, {2, 1}, {4, 1}});
  g.context = F("x>=0 & x_post>=0 & g>0 & c=1");
  return g;
}

std::string c5_monitor_regression(Check& c) {
  LoopModel lm = extract_loop_model(model("bouncing_ball_symbolic.dlm"));
  Formula ctrl = synth_controller_monitor(lm.ctrl, lm.state_vars).formula;
  Formula mdl = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  Formula reference_ctrl = F("(x=0 & v_post=-v | x>0 & v_post=v) & x_post=x");
  Formula reference_mdl = F("2*g*(x_post-x)=v^2-v_post^2 & x>=0 & (x_post>0 & v_post<=v | x_post=0 & v_post>=-v)");
  GridSpec grid = monitor_grid();
  EquivResult rc = monitor_equiv(ctrl, reference_ctrl, grid);
  EquivResult rm = monitor_equiv(mdl, reference_mdl, grid);
  c.require(rc.equivalent, "controller monitor mismatch");
  c.require(rm.equivalent, "model monitor mismatch");
  c.require(rc.evaluated >= kMonitorGridPoints && rm.evaluated >= kMonitorGridPoints, "too few grid points");
  return "controller points=" + std::to_string(rc.evaluated) + " model points=" + std::to_string(rm.evaluated);
}

std::string c6_transition_soundness(Check& c) {
  LoopModel lm = extract_loop_model(model("bouncing_ball_symbolic.dlm"));
  Formula monitor = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
  EnumBudget b;
  b.time_grid = {0, Q(1, 8), Q(1, 4), Q(1, 2), Q(3, 4), Q(1), Q(3, 2)};
  FuzzGen gen(2024);
  size_t accepted = 0, transitions = 0, perturbed = 0, rejected = 0;
  std::vector<Rational> offsets{Q(-1), Q(-1, 3), Q(0), Q(1, 7), Q(1, 2), Q(2)};
  while (transitions < kSoundnessTransitions) {
    ExactState prior{{VarName{"x"}, abs(gen.rational())},
                     {VarName{"v"}, gen.rational()},
                     {VarName{"g"}, abs(gen.rational()) + Q(1, 4)},
                     {VarName{"H"}, gen.rational()}};
    if (gen.pick(3) == 0) prior[VarName{"x"}] = 0;
    const Rational& g = prior.at(VarName{"g"});
    for (const auto& post : reachable_states(lm.body, prior, b)) {
      ++transitions;
      accepted += eval_monitor(monitor, prior, posts(post));
      for (const auto& dx : offsets)
        for (const auto& dv : offsets) {
          Rational xp = post.at(VarName{"x"}) + dx, vp = post.at(VarName{"v"}) + dv;
          Rational x = prior.at(VarName{"x"}), v = prior.at(VarName{"v"});
          if (2 * g * (xp - x) == v * v - vp * vp) continue;
          ++perturbed;
          ExactState p{{post_var(VarName{"x"}), xp}, {post_var(VarName{"v"}), vp}};
          rejected += !eval_monitor(monitor, prior, p);
        }
    }
  }
  c.require(accepted == transitions, "a simulated transition was rejected");
  c.require(perturbed > 0 && rejected == perturbed, "an energy-violating transition was accepted");
  return "transitions=" + std::to_string(accepted) + "/" + std::to_string(transitions) +
         " rejected=" + std::to_string(rejected) + "/" + std::to_string(perturbed);
}

bool bounded(const ExactState& s) { return s.at(VarName{"x"}) >= 0 && s.at(VarName{"x"}) <= s.at(VarName{"H"}); }

bool all_bounded(const SandboxRun& run) {
  for (const auto& c : run.cycles)
    if (!bounded(c.prior) || !bounded(c.actuated) || !bounded(c.posterior)) return false;
  return run.summary.safe;
}

std::string c7_sandbox(Check& c) {
  auto path = [](const char* n) { return dltest::source_dir() / "scenarios" / n; };
  std::ostringstream out;
  auto run = [&](const char* n) {
    auto start = Clock::now();
    SandboxRun r = run_sandbox(load_sandbox_config(path(n)));
    double secs = since(start);
    c.require(secs <= kScenarioSeconds, std::string(n) + " too slow");
    return r;
  };

  SandboxRun a = run("a.cfg");
  c.require(a.summary.cycles == kScenarioCycles, "a: cycle count");
  c.require(a.summary.vetoes == 0 && a.summary.violations == 0, "a: vetoes or violations");
  c.require(all_bounded(a), "a: left 0<=x<=H");

  SandboxRun b = run("b.cfg");
  c.require(b.summary.vetoes >= 1, "b: no veto");
  c.require(all_bounded(b), "b: left 0<=x<=H");

  SandboxRun cc = run("c.cfg");
  std::optional<size_t> bounce;
  for (const auto& r : cc.cycles)
    if (!bounce && r.prior.at(VarName{"x"}) == 0) bounce = r.cycle;
  c.require(bounce.has_value(), "c: no bounce");
  c.require(cc.summary.first_violation && cc.summary.first_violation == bounce, "c: violation not on the first bounce");

  out << "a: vetoes=" << a.summary.vetoes << " violations=" << a.summary.violations << "; b: vetoes="
      << b.summary.vetoes << "; c: first violation at cycle " << cc.summary.first_violation.value_or(0)
      << ", bounce at cycle " << bounce.value_or(0);
  return out.str();
}

std::string c8_roundtrip(Check& c) {
  dltest::AstGen gen(8);
  size_t failures = 0;
  for (size_t i = 0; i < kRoundtripCases; ++i) {
    Formula f = gen.formula(8);
    std::string text = to_string(f);
    try {
      Formula back = parse_formula(text);
      if (!structural_eq(back, f) || to_string(back) != text) ++failures;
    } catch (const Error&) {
      ++failures;
    }
  }
  size_t files = 0;
  for (const auto& e : std::filesystem::directory_iterator(dltest::source_dir() / "corpus")) {
    if (e.path().extension() != ".dlm") continue;
    ++files;
    ModelFile m = parse_model_file(e.path());
    std::string printed = print_model_file(m);
    ModelFile again = parse_model_text(printed, m.name);
    if (!structural_eq(again.problem, m.problem) || print_model_file(again) != printed) ++failures;
  }
  c.require(failures == 0, std::to_string(failures) + " roundtrip failures");
  c.require(files >= 2, "corpus not found");
  return std::to_string(kRoundtripCases) + " ASTs, " + std::to_string(files) + " corpus files";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string(Check&)>>> criteria{
      {"1 literal-constant proof", c1_literal_proof},   {"2 symbolic-constant proof", c2_symbolic_proof},
      {"3 axiom soundness fuzzing", c3_axiom_fuzz},     {"4 simulator accuracy", c4_simulator},
      {"5 monitor regression", c5_monitor_regression},  {"6 monitor transition soundness", c6_transition_soundness},
      {"7 sandbox scenarios", c7_sandbox},              {"8 parser robustness", c8_roundtrip},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    std::string detail;
    try {
      detail = run(c);
    } catch (const std::exception& e) {
      c.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (c.ok ? "PASS " : "FAIL ") << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    if (!c.ok) std::cout << ": " << c.why.str();
    std::cout << std::endl;
    failed += !c.ok;
  }
  return failed == 0 ? 0 : 1;
}
