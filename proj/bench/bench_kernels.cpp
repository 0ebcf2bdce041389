// OpenMP kernels against their serial references.
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "jsseg/cluster.hpp"
#include "jsseg/divergence.hpp"

using namespace jsseg;

namespace {

std::vector<double> series(std::size_t n) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> z(0.0, 1e-3);
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = z(rng) * (i < n / 3 ? 1.0 : 2.0);
  return x;
}

std::vector<SegmentStats> segments(std::size_t m) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> sd(5e-4, 1e-2);
  std::vector<SegmentStats> s;
  for (std::size_t i = 0; i < m; ++i) s.push_back(make_stats(20 + rng() % 2000, 0.0, sd(rng)));
  return s;
}

void BM_best_split_serial(benchmark::State& state) {
  const auto x = series(static_cast<std::size_t>(state.range(0)));
  const PrefixSums sums(x);
  for (auto _ : state) benchmark::DoNotOptimize(best_split_serial(sums, 0, x.size(), 14));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_best_split(benchmark::State& state) {
  const auto x = series(static_cast<std::size_t>(state.range(0)));
  const PrefixSums sums(x);
  for (auto _ : state) benchmark::DoNotOptimize(best_split(sums, 0, x.size(), 14));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_distance_matrix_serial(benchmark::State& state) {
  const auto s = segments(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix_serial(s));
}

void BM_distance_matrix(benchmark::State& state) {
  const auto s = segments(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(distance_matrix(s));
}

}  // namespace

BENCHMARK(BM_best_split_serial)->Arg(4096)->Arg(31560)->Arg(1 << 18);
BENCHMARK(BM_best_split)->Arg(4096)->Arg(31560)->Arg(1 << 18);
BENCHMARK(BM_distance_matrix_serial)->Arg(64)->Arg(256);
BENCHMARK(BM_distance_matrix)->Arg(64)->Arg(256);

BENCHMARK_MAIN();
