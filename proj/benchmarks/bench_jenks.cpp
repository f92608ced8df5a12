#include <random>

#include <benchmark/benchmark.h>

#include "ember/classify.hpp"

static void BM_Jenks(benchmark::State& state) {
  std::mt19937_64 g(7);
  std::gamma_distribution<double> gam(2.0, 3.0);
  std::vector<double> v(static_cast<std::size_t>(state.range(0)));
  for (auto& x : v) x = gam(g);
  for (auto _ : state) benchmark::DoNotOptimize(ember::jenks(v, 4));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Jenks)->RangeMultiplier(4)->Range(16, 1024)->Complexity()->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
