#include <random>

#include <benchmark/benchmark.h>

#include "ember/spatial.hpp"

using namespace ember;

static void BM_Voronoi(benchmark::State& state) {
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(0, 10000);
  std::vector<Site> sites;
  for (long i = 0; i < state.range(0); ++i) sites.push_back({"S" + std::to_string(i), {u(g), u(g)}});
  const MultiPolygon box = {{{{0, 0}, {10000, 0}, {10000, 10000}, {0, 10000}}, {}}};
  for (auto _ : state) benchmark::DoNotOptimize(voronoi(sites, box));
}
BENCHMARK(BM_Voronoi)->Arg(10)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_NearestSite(benchmark::State& state) {
  std::mt19937_64 g(4);
  std::uniform_real_distribution<double> u(0, 10000);
  std::vector<Site> sites;
  for (int i = 0; i < 30; ++i) sites.push_back({"S" + std::to_string(i), {u(g), u(g)}});
  Vec2 p{5000, 5000};
  for (auto _ : state) {
    p = {u(g), u(g)};
    benchmark::DoNotOptimize(nearest_site(p, sites));
  }
}
BENCHMARK(BM_NearestSite);

BENCHMARK_MAIN();
