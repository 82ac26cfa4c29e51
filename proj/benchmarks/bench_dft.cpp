#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "flexkit/spectral.hpp"

namespace {

std::vector<double> hourly_month(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 1000.0 + 800.0 * std::sin(2.0 * M_PI * static_cast<double>(i) / 24.0);
  return v;
}

void BM_DftPowerOfTwo(benchmark::State& state) {
  const auto x = hourly_month(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::dft(x, 1.0 / 3600.0, flexkit::Detrend::remove_mean));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DftPowerOfTwo)->RangeMultiplier(4)->Range(256, 65536)->Complexity();

// 744 = one 31-day month of hourly readings; goes through Bluestein
void BM_DftMonth(benchmark::State& state) {
  const auto x = hourly_month(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::dft(x, 1.0 / 3600.0, flexkit::Detrend::remove_mean));
}
BENCHMARK(BM_DftMonth)->Arg(672)->Arg(744)->Arg(8760);

}  // namespace
