#include <benchmark/benchmark.h>

#include "flexkit/hvac.hpp"
#include "flexkit/synthetic.hpp"

namespace {

const flexkit::TrainingSet& training_set() {
  static const flexkit::TrainingSet set = [] {
    flexkit::ApartmentBlockParams p;
    p.apartments = 1;
    p.days = 30;
    return flexkit::prepare_training_set(flexkit::generate_apartment_block(p, 1)[0].samples);
  }();
  return set;
}

void BM_TrainForest(benchmark::State& state) {
  flexkit::ForestParams params;
  params.n_trees = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::train_state_predictor(training_set(), params));
}
BENCHMARK(BM_TrainForest)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_TrainThermal(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::train_thermal(training_set()));
}
BENCHMARK(BM_TrainThermal);

void BM_Forecast(benchmark::State& state) {
  flexkit::ApartmentBlockParams p;
  p.apartments = 1;
  p.days = 14;
  const auto samples = flexkit::generate_apartment_block(p, 2)[0].samples;
  const auto model = flexkit::train_hvac_models("A01", 1.5, samples);
  const auto origin = flexkit::forecast_origin(samples, 900);
  flexkit::ForecastRequest req;
  req.horizon_steps = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flexkit::forecast_flexibility(model.thermal, model.state, origin, req));
}
BENCHMARK(BM_Forecast)->Arg(12)->Arg(96);

}  // namespace
