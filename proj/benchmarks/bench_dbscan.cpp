#include <benchmark/benchmark.h>

#include <random>

#include "flexkit/clustering.hpp"

namespace {

flexkit::PointSet blobs(std::size_t n, std::size_t dims) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> noise(0.0, 0.3);
  flexkit::PointSet ps(dims);
  std::vector<double> p(dims);
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : p) v = static_cast<double>(i % 4) * 3.0 + noise(rng);
    ps.push_back(p);
  }
  return ps;
}

void BM_Dbscan1d(benchmark::State& state) {
  const auto ps = blobs(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::dbscan(ps, {0.5, 5}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dbscan1d)->RangeMultiplier(4)->Range(32, 8192)->Complexity();

void BM_Dbscan2d(benchmark::State& state) {
  const auto ps = blobs(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::dbscan(ps, {0.5, 5}));
}
BENCHMARK(BM_Dbscan2d)->RangeMultiplier(4)->Range(32, 2048);

void BM_TuneEpsilon(benchmark::State& state) {
  const auto ps = blobs(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::tune_epsilon(ps, 5));
}
BENCHMARK(BM_TuneEpsilon)->Arg(31)->Arg(744);

}  // namespace
