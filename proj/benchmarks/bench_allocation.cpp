#include <benchmark/benchmark.h>

#include <random>

#include "flexkit/allocation.hpp"

namespace {

struct Problem {
  flexkit::DrEvent event;
  std::vector<flexkit::Contract> contracts;
  std::vector<flexkit::FlexibilityForecast> forecasts;
};

Problem problem(std::size_t occupants, std::size_t steps) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> cap(0.0, 2.0);
  Problem p;
  p.event = {"bench", flexkit::EventDirection::reduce, 0.4 * static_cast<double>(occupants),
             1626264000, static_cast<std::int64_t>(steps) * 900, 900, 1626260400};
  for (std::size_t i = 0; i < occupants; ++i) {
    flexkit::Contract c;
    c.occupant_id = "occ-" + std::to_string(100000 + i);
    c.max_flex_kw = {1.5};
    p.contracts.push_back(c);
    flexkit::FlexibilityForecast f;
    f.device_id = c.occupant_id;
    f.start_time = p.event.start_time;
    f.horizon_steps = steps;
    for (std::size_t t = 0; t < steps; ++t) f.available_flex_kw.push_back(cap(rng));
    f.baseline_states.assign(steps, 1);
    f.flex_states.assign(steps, 0);
    p.forecasts.push_back(f);
  }
  return p;
}

void BM_SolveProportional(benchmark::State& state) {
  const auto p = problem(static_cast<std::size_t>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::solve_allocation(p.event, p.contracts, p.forecasts));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SolveProportional)->RangeMultiplier(4)->Range(4, 4096)->Complexity();

void BM_SolveGreedy(benchmark::State& state) {
  const auto p = problem(static_cast<std::size_t>(state.range(0)), 8);
  const flexkit::AllocationOptions o{flexkit::AllocationPolicy::greedy_cheapest_first, flexkit::ObjectiveMode::event_total};
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::solve_allocation(p.event, p.contracts, p.forecasts, o));
}
BENCHMARK(BM_SolveGreedy)->RangeMultiplier(4)->Range(4, 4096);

}  // namespace
