#include <benchmark/benchmark.h>

#include "ember/nb2.hpp"
#include "ember/simulate.hpp"

using namespace ember;

static void BM_FitNb2(benchmark::State& state) {
  ScenarioSpec spec = default_scenario(1);
  spec.n_regions = static_cast<std::size_t>(state.range(0));
  spec.n_periods = 50;
  const Scenario sc = generate(spec);
  const Panel slice = sc.panel.slice(EventType::FR);
  for (auto _ : state) benchmark::DoNotOptimize(fit_nb2(slice, slice.feature_names));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(slice.size()));
}
BENCHMARK(BM_FitNb2)->Arg(20)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_Loglik(benchmark::State& state) {
  const Scenario sc = generate(default_scenario(2));
  const Design d = make_design(sc.panel.slice(EventType::FR), sc.panel.feature_names);
  const std::vector<double> b = {1.0, 0.5, -0.25};
  for (auto _ : state) benchmark::DoNotOptimize(nb2_loglik(d, b, 0.5));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(d.n()));
}
BENCHMARK(BM_Loglik);

BENCHMARK_MAIN();
