#include <random>

#include <benchmark/benchmark.h>

#include "ember/importance.hpp"

using namespace ember;

namespace {

Dataset data(std::size_t n, std::size_t p) {
  std::mt19937_64 g(11);
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> z;
  Dataset d;
  for (std::size_t f = 0; f < p; ++f) d.feature_names.push_back("x" + std::to_string(f));
  for (std::size_t i = 0; i < n; ++i) {
    double y = 0;
    for (std::size_t f = 0; f < p; ++f) {
      d.x.push_back(u(g));
      if (f < 2) y += d.x.back();
    }
    d.y.push_back(y + 0.3 * z(g));
  }
  return d;
}

}  // namespace

static void BM_FitForest(benchmark::State& state) {
  const Dataset d = data(300, 8);
  ForestConfig c;
  c.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_forest(d, c));
}
BENCHMARK(BM_FitForest)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_PermutationImportance(benchmark::State& state) {
  const Dataset d = data(300, 8);
  ForestConfig c;
  c.n_trees = 200;
  c.threads = static_cast<unsigned>(state.range(0));
  const Forest f = fit_forest(d, c);
  for (auto _ : state) benchmark::DoNotOptimize(permutation_importance(f, d));
}
BENCHMARK(BM_PermutationImportance)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
