#include "flexkit/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "flexkit/csv.hpp"
#include "flexkit/error.hpp"
#include "flexkit/forest.hpp"

namespace flexkit {

std::string_view to_string(ScenarioKind kind) noexcept {
  return kind == ScenarioKind::industrial_park ? "industrial_park" : "apartment_block";
}

std::optional<ScenarioKind> parse_scenario_kind(std::string_view text) noexcept {
  if (text == "industrial_park") return ScenarioKind::industrial_park;
  if (text == "apartment_block") return ScenarioKind::apartment_block;
  return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidParameters, what); }

bool positive(double v) { return std::isfinite(v) && v > 0.0; }

// Rounds to `scale` steps per unit; dividing keeps the shortest decimal form.
double round_to(double v, double scale) { return std::round(v * scale) / scale; }

std::string asset_name(char prefix, std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%c%02zu", prefix, index + 1);
  return buf;
}

Rng stream(std::uint64_t seed, std::size_t index) { return Rng(splitmix64(seed ^ splitmix64(index + 0x51ED))); }

}  // namespace

void validate_scenario(const SyntheticScenario& s) {
  const auto& ip = s.industrial;
  if (s.kind == ScenarioKind::industrial_park) {
    if (ip.buildings == 0 || ip.buildings > 99) invalid("buildings must be in 1..99");
    if (ip.first_month < 1 || ip.first_month > 12 || ip.months == 0) invalid("invalid month range");
    if (!(ip.night_wh >= 0.0) || !positive(ip.day_wh) || !positive(ip.spike_wh)) invalid("levels must be positive");
    if (ip.day_start_hour < 0 || ip.day_end_hour > 24 || ip.day_start_hour >= ip.day_end_hour)
      invalid("invalid day hours");
    if (ip.weekend_factor < 0.0 || ip.weekend_factor > 1.0) invalid("weekend_factor must be in [0, 1]");
    if (ip.building_spread < 0.0 || ip.building_spread >= 1.0) invalid("building_spread must be in [0, 1)");
    if (ip.spike_probability < 0.0 || ip.spike_probability > 1.0) invalid("spike_probability must be in [0, 1]");
    if (!(ip.noise_sd_wh >= 0.0)) invalid("noise must be non-negative");
    return;
  }
  const auto& ap = s.apartments;
  if (ap.apartments == 0 || ap.apartments > 99) invalid("apartments must be in 1..99");
  if (ap.days == 0) invalid("days must be positive");
  if (ap.sample_s <= 0 || 86400 % ap.sample_s != 0) invalid("sample_s must divide a day");
  if (!positive(ap.tau_min) || !positive(ap.offset_c) || !positive(ap.rated_power_kw)) invalid("RC parameters must be positive");
  if (!(ap.hysteresis_c >= 0.0)) invalid("hysteresis must be non-negative");
  if (ap.setpoints_c.empty()) invalid("setpoints must not be empty");
  if (!(ap.standby_w >= 0.0) || ap.standby_w >= kDefaultStandbyW) invalid("standby_w must be below the ON threshold");
  if (!(ap.sensor_noise_c >= 0.0)) invalid("sensor noise must be non-negative");
  if (ap.control_interval_s <= 0 || ap.control_interval_s % ap.sample_s != 0)
    invalid("control_interval_s must be a multiple of sample_s");
  if (ap.outdoor_hold_s < 0 || (ap.outdoor_hold_s > 0 && ap.outdoor_hold_s % ap.sample_s != 0))
    invalid("outdoor_hold_s must be a multiple of sample_s");
}

std::vector<SyntheticBuilding> generate_industrial_park(const IndustrialParkParams& p, std::uint64_t seed) {
  SyntheticScenario check;
  check.industrial = p;
  validate_scenario(check);

  const YearMonth first{p.year, p.first_month};
  YearMonth last = first;
  for (unsigned m = 0; m < p.months; ++m) last = last.next();
  const EpochSeconds begin = first.begin();
  const auto hours = static_cast<std::size_t>((last.begin() - begin) / 3600);

  std::vector<SyntheticBuilding> out;
  for (std::size_t b = 0; b < p.buildings; ++b) {
    Rng rng = stream(seed, b);
    BuildingTruth truth;
    truth.asset_id = asset_name('B', b);
    truth.scale = 1.0 + p.building_spread * (2.0 * rng.uniform() - 1.0);
    std::vector<double> values(hours);
    for (std::size_t h = 0; h < hours; ++h) {
      const EpochSeconds t = begin + static_cast<EpochSeconds>(h) * 3600;
      const int hour = static_cast<int>(floor_mod(t, 86400) / 3600);
      const bool weekend = weekday_monday0(t) >= 5;
      const double night = p.night_wh * truth.scale;
      double v = night;
      if (hour >= p.day_start_hour && hour < p.day_end_hour) {
        const double plateau = p.day_wh * truth.scale;
        v = weekend ? night + (plateau - night) * p.weekend_factor : plateau;
      }
      v += p.noise_sd_wh * rng.normal();
      if (rng.uniform() < p.spike_probability) {
        v = p.spike_wh * (0.9 + 0.2 * rng.uniform());
        ++truth.spikes;
      }
      values[h] = round_to(std::max(0.0, v), 10.0);
    }
    out.push_back({std::move(truth), MeterSeries(begin, 3600, std::move(values))});
  }
  return out;
}

double synthetic_outdoor_c(const ApartmentBlockParams& p, EpochSeconds t) {
  if (p.outdoor_hold_s > 0) t = p.start_time + floor_div(t - p.start_time, p.outdoor_hold_s) * p.outdoor_hold_s;
  const double hour = static_cast<double>(floor_mod(t, 86400)) / 3600.0;
  const double v = p.outdoor_mean_c + p.outdoor_amplitude_c * std::sin(2.0 * std::numbers::pi * (hour - 9.0) / 24.0);
  return round_to(v, 100.0);
}

std::vector<SyntheticApartment> generate_apartment_block(const ApartmentBlockParams& p, std::uint64_t seed) {
  SyntheticScenario check;
  check.kind = ScenarioKind::apartment_block;
  check.apartments = p;
  validate_scenario(check);

  const auto per_day = static_cast<std::size_t>(86400 / p.sample_s);
  const std::size_t n = per_day * p.days;
  const double decay = std::exp(-static_cast<double>(p.sample_s) / 60.0 / p.tau_min);
  const double sign = p.mode == HvacMode::cooling ? -1.0 : 1.0;

  std::vector<SyntheticApartment> out;
  for (std::size_t a = 0; a < p.apartments; ++a) {
    Rng rng = stream(seed, 1000 + a);
    SyntheticApartment apt;
    apt.truth = {asset_name('A', a), p.tau_min, p.offset_c, p.hysteresis_c, p.rated_power_kw, {}};
    apt.samples.reserve(n);
    double temp = p.initial_indoor_c;
    int state = 0;
    double set = p.setpoints_c.front();
    for (std::size_t i = 0; i < n; ++i) {
      const EpochSeconds t = p.start_time + static_cast<EpochSeconds>(i) * p.sample_s;
      if (i % per_day == 0) {
        set = p.setpoints_c[rng.below(p.setpoints_c.size())];
        apt.truth.daily_setpoints_c.push_back(set);
      }
      const double outdoor = synthetic_outdoor_c(p, t);
      const int hour = static_cast<int>(floor_mod(t, 86400) / 3600);
      if (floor_mod(t - p.start_time, p.control_interval_s) == 0) {
        if (hour >= p.night_off_start_hour && hour < p.night_off_end_hour) {
          state = 0;
        } else if (p.mode == HvacMode::cooling) {
          if (state == 0 && temp >= set + p.hysteresis_c) state = 1;
          else if (state == 1 && temp <= set - p.hysteresis_c) state = 0;
        } else {
          if (state == 0 && temp <= set - p.hysteresis_c) state = 1;
          else if (state == 1 && temp >= set + p.hysteresis_c) state = 0;
        }
      }
      double measured = temp;
      if (p.sensor_noise_c > 0.0) measured = round_to(temp + p.sensor_noise_c * rng.normal(), 1000.0);
      apt.samples.push_back({t, measured, outdoor, state == 1 ? p.rated_power_kw * 1000.0 : p.standby_w, state, set});
      const double equilibrium = outdoor + sign * p.offset_c * state;
      temp = equilibrium + (temp - equilibrium) * decay;
    }
    out.push_back(std::move(apt));
  }
  return out;
}

std::vector<SyntheticFile> generate_synthetic(const SyntheticScenario& scenario) {
  validate_scenario(scenario);
  std::vector<SyntheticFile> files;
  Json truth;
  truth["scenario"] = to_string(scenario.kind);
  truth["seed"] = scenario.seed;
  Json assets = Json::array();
  if (scenario.kind == ScenarioKind::industrial_park) {
    const auto& p = scenario.industrial;
    truth["params"] = {{"buildings", p.buildings},         {"year", p.year},
                       {"first_month", p.first_month},     {"months", p.months},
                       {"night_wh", p.night_wh},           {"day_wh", p.day_wh},
                       {"day_start_hour", p.day_start_hour}, {"day_end_hour", p.day_end_hour},
                       {"weekend_factor", p.weekend_factor}, {"building_spread", p.building_spread},
                       {"spike_probability", p.spike_probability}, {"spike_wh", p.spike_wh},
                       {"noise_sd_wh", p.noise_sd_wh},     {"dominant_period_s", 86400}};
    for (const auto& b : generate_industrial_park(p, scenario.seed)) {
      files.push_back({"meters/" + b.truth.asset_id + ".csv", format_meter_csv(b.series)});
      assets.push_back({{"asset_id", b.truth.asset_id},
                        {"kind", "building_meter"},
                        {"scale", b.truth.scale},
                        {"spikes", b.truth.spikes},
                        {"file", "meters/" + b.truth.asset_id + ".csv"}});
    }
  } else {
    const auto& p = scenario.apartments;
    truth["params"] = {{"apartments", p.apartments},
                       {"start_time", format_rfc3339(p.start_time)},
                       {"days", p.days},
                       {"sample_s", p.sample_s},
                       {"mode", to_string(p.mode)},
                       {"tau_min", p.tau_min},
                       {"offset_c", p.offset_c},
                       {"hysteresis_c", p.hysteresis_c},
                       {"setpoints_c", p.setpoints_c},
                       {"rated_power_kw", p.rated_power_kw},
                       {"standby_w", p.standby_w},
                       {"night_off_hours", {p.night_off_start_hour, p.night_off_end_hour}},
                       {"outdoor_mean_c", p.outdoor_mean_c},
                       {"outdoor_amplitude_c", p.outdoor_amplitude_c},
                       {"sensor_noise_c", p.sensor_noise_c},
                       {"control_interval_s", p.control_interval_s},
                       {"outdoor_hold_s", p.outdoor_hold_s}};
    for (const auto& a : generate_apartment_block(p, scenario.seed)) {
      files.push_back({"hvac/" + a.truth.asset_id + ".csv", format_hvac_csv(a.samples)});
      assets.push_back({{"asset_id", a.truth.asset_id},
                        {"kind", "hvac_unit"},
                        {"rated_power_kw", a.truth.rated_power_kw},
                        {"tau_min", a.truth.tau_min},
                        {"offset_c", a.truth.offset_c},
                        {"hysteresis_c", a.truth.hysteresis_c},
                        {"daily_setpoints_c", a.truth.daily_setpoints_c},
                        {"file", "hvac/" + a.truth.asset_id + ".csv"}});
    }
  }
  truth["assets"] = std::move(assets);
  files.push_back({"ground_truth.json", dump_document(truth)});
  return files;
}

}  // namespace flexkit
