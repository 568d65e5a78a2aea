// Serial reference versus OpenMP for the two data-parallel kernels.

#include <benchmark/benchmark.h>

#include "dl/fuzz.hpp"
#include "dl/model_file.hpp"
#include "dl/modelplex.hpp"
#include "dl/parser.hpp"

using namespace dl;

namespace {

void fuzz_args(benchmark::internal::Benchmark* b) {
  for (int axiom = 0; axiom < static_cast<int>(axiom_names().size()); ++axiom) b->Args({axiom, 500});
}

void BM_AxiomFuzzSerial(benchmark::State& st) {
  const std::string& axiom = axiom_names().at(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(axiom_fuzz_serial(axiom, st.range(1), 7));
  st.SetLabel(axiom);
  st.SetItemsProcessed(st.iterations() * st.range(1));
}

void BM_AxiomFuzzParallel(benchmark::State& st) {
  const std::string& axiom = axiom_names().at(st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(axiom_fuzz(axiom, st.range(1), 7));
  st.SetLabel(axiom);
  st.SetItemsProcessed(st.iterations() * st.range(1));
}

struct MonitorFixture {
  Formula synthesized, reference;
  GridSpec grid;

  explicit MonitorFixture(int points) {
    LoopModel lm = extract_loop_model(parse_model_file(std::string(DLBENCH_CORPUS) + "/bouncing_ball_symbolic.dlm"));
    synthesized = synth_model_monitor(lm.body, lm.state_vars, lm.assumptions).formula;
    reference = parse_formula("2*g*(x_post-x)=v^2-v_post^2 & x>=0 & (x_post>0 & v_post<=v | x_post=0 & v_post>=-v)");
    for (int i = 0; i < points; ++i) {
      Rational r(i - points / 2, 2);
      r.canonicalize();
      for (const char* n : {"x", "v", "x_post", "v_post"}) grid.values[var_from_key(n)].push_back(r);
      Rational g(i + 1, 2);
      g.canonicalize();
      grid.values[VarName{"g"}].push_back(g);
    }
  }
};

void BM_MonitorEquivSerial(benchmark::State& st) {
  MonitorFixture f(static_cast<int>(st.range(0)));
  EquivResult r;
  for (auto _ : st) benchmark::DoNotOptimize(r = monitor_equiv_serial(f.synthesized, f.reference, f.grid));
  st.SetItemsProcessed(st.iterations() * r.evaluated);
}

void BM_MonitorEquivParallel(benchmark::State& st) {
  MonitorFixture f(static_cast<int>(st.range(0)));
  EquivResult r;
  for (auto _ : st) benchmark::DoNotOptimize(r = monitor_equiv(f.synthesized, f.reference, f.grid));
  st.SetItemsProcessed(st.iterations() * r.evaluated);
}

}  // namespace

BENCHMARK(BM_AxiomFuzzSerial)->Apply(fuzz_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AxiomFuzzParallel)->Apply(fuzz_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MonitorEquivSerial)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MonitorEquivParallel)->Arg(5)->Arg(9)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
