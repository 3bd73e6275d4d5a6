#include <benchmark/benchmark.h>

#include "cohaptics/experiments.hpp"

using namespace cohaptics;

namespace {

Scenario exp2() { return load_scenario(std::string(COHAPTICS_SCENARIOS) + "/exp2.json"); }

void BM_SingleRun(benchmark::State& state) {
  SimConfig c = load_scenario(std::string(COHAPTICS_SCENARIOS) + "/run_default.json").config;
  c.duration = 60.0;
  for (auto _ : state) benchmark::DoNotOptimize(run(c));
  state.SetItemsProcessed(state.iterations() * c.tick_count());
}

void BM_Placements(benchmark::State& state, Execution execution) {
  const Scenario s = exp2();
  Exp2Options o = exp2_options_from_json(s.experiment);
  o.placements = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_exp2_placements(s.config, o, execution));
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = execution == Execution::Parallel ? batch_threads() : 1;
}

}  // namespace

BENCHMARK(BM_SingleRun)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Placements, serial, Execution::Serial)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Placements, parallel, Execution::Parallel)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
