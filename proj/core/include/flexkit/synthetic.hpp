#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/documents.hpp"
#include "flexkit/hvac.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

enum class ScenarioKind { industrial_park, apartment_block };
std::string_view to_string(ScenarioKind kind) noexcept;
std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept;

/// Hourly building meters with a day plateau, a low night floor, quieter
/// weekends and rare spikes.
struct IndustrialParkParams {
  std::size_t buildings = 7;
  int year = 2021;
  unsigned first_month = 1;
  unsigned months = 12;
  double night_wh = 300.0;
  double day_wh = 1800.0;
  int day_start_hour = 7;  // UTC
  int day_end_hour = 19;
  double weekend_factor = 0.35;  // share of the day plateau kept on weekends
  double building_spread = 0.15;  // per-building scale drawn from 1 +- spread
  double spike_probability = 0.004;
  double spike_wh = 5000.0;
  double noise_sd_wh = 40.0;
};

/// One-minute first-order RC apartments with a hysteresis thermostat:
/// dT/dt = (T_out - T)/tau + q*state/C, written here with the steady-state
/// offset K = |q| tau / C so that T relaxes to T_out -+ K*state.
struct ApartmentBlockParams {
  std::size_t apartments = 8;
  EpochSeconds start_time = 1625097600;  // 2021-07-01T00:00:00Z
  std::size_t days = 30;
  std::int64_t sample_s = 60;
  HvacMode mode = HvacMode::cooling;
  double tau_min = 180.0;
  double offset_c = 18.0;
  double hysteresis_c = 1.5;
  std::vector<double> setpoints_c{23.0, 24.0, 25.0, 26.0};
  double rated_power_kw = 1.5;
  double standby_w = 10.0;
  int night_off_start_hour = 1;  // HVAC switched off in [start, end) UTC
  int night_off_end_hour = 7;
  double outdoor_mean_c = 30.0;
  double outdoor_amplitude_c = 6.0;
  double initial_indoor_c = 28.0;
  double sensor_noise_c = 0.1;
  /// Thermostat decisions only every `control_interval_s`.
  std::int64_t control_interval_s = 60;
  /// Hold outdoor temperature constant within each block of this length (0 = per sample).
  std::int64_t outdoor_hold_s = 0;
};

struct SyntheticScenario {
  ScenarioKind kind = ScenarioKind::industrial_park;
  std::uint64_t seed = 42;
  IndustrialParkParams industrial;
  ApartmentBlockParams apartments;
};

/// Throws `InvalidParameters`.
void validate_scenario(const SyntheticScenario& scenario);

struct BuildingTruth {
  std::string asset_id;
  double scale = 1.0;
  std::size_t spikes = 0;
};

struct SyntheticBuilding {
  BuildingTruth truth;
  MeterSeries series;
};

struct ApartmentTruth {
  std::string asset_id;
  double tau_min = 0.0;
  double offset_c = 0.0;
  double hysteresis_c = 0.0;
  double rated_power_kw = 0.0;
  std::vector<double> daily_setpoints_c;
};

struct SyntheticApartment {
  ApartmentTruth truth;
  std::vector<HvacSample> samples;
};

std::vector<SyntheticBuilding> generate_industrial_park(const IndustrialParkParams& params, std::uint64_t seed);
std::vector<SyntheticApartment> generate_apartment_block(const ApartmentBlockParams& params, std::uint64_t seed);

/// Outdoor temperature model used by the apartment scenario.
double synthetic_outdoor_c(const ApartmentBlockParams& params, EpochSeconds t);

struct SyntheticFile {
  std::string name;  // relative path
  std::string content;
};

/// Meter or HVAC CSVs plus `ground_truth.json`; byte-identical for the same
/// scenario.
std::vector<SyntheticFile> generate_synthetic(const SyntheticScenario& scenario);

}  // namespace flexkit
