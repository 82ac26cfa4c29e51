#include "flexkit/hvac.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "flexkit/error.hpp"

namespace flexkit {

void validate_sample(const HvacSample& s, double standby_w) {
  const auto in_range = [](double t) { return std::isfinite(t) && t >= kMinPhysicalTempC && t <= kMaxPhysicalTempC; };
  if (!in_range(s.indoor_temp_c) || !in_range(s.outdoor_temp_c) || !in_range(s.set_temp_c)) {
    throw Error(ErrorCode::InvalidSample, "temperature outside [-40, 60] C");
  }
  if (!std::isfinite(s.hvac_power_w) || s.hvac_power_w < 0.0) {
    throw Error(ErrorCode::InvalidSample, "power must be finite and non-negative");
  }
  if (s.hvac_state != 0 && s.hvac_state != 1) throw Error(ErrorCode::InvalidSample, "state must be 0 or 1");
  if (s.hvac_state == 1 && !(s.hvac_power_w > standby_w)) {
    throw Error(ErrorCode::InvalidSample, "ON state with power at or below standby");
  }
}

std::string_view to_string(HvacMode mode) noexcept { return mode == HvacMode::cooling ? "cooling" : "heating"; }

std::optional<HvacMode> parse_hvac_mode(std::string_view text) noexcept {
  if (text == "cooling") return HvacMode::cooling;
  if (text == "heating") return HvacMode::heating;
  return std::nullopt;
}

std::vector<StepRecord> aggregate_steps(std::span<const HvacSample> samples, std::int64_t step_s) {
  if (step_s <= 0) throw Error(ErrorCode::InvalidParameters, "step must be positive");
  std::vector<StepRecord> out;
  std::size_t i = 0;
  while (i < samples.size()) {
    const EpochSeconds bucket = floor_div(samples[i].timestamp, step_s) * step_s;
    StepRecord rec;
    rec.timestamp = bucket;
    rec.indoor_c = samples[i].indoor_temp_c;
    rec.outdoor_c = samples[i].outdoor_temp_c;
    rec.set_c = samples[i].set_temp_c;
    double on = 0.0, power = 0.0;
    std::size_t n = 0;
    while (i < samples.size() && floor_div(samples[i].timestamp, step_s) * step_s == bucket) {
      on += samples[i].hvac_state;
      power += samples[i].hvac_power_w;
      ++n;
      ++i;
    }
    rec.duty = on / static_cast<double>(n);
    rec.power_w = power / static_cast<double>(n);
    rec.state = rec.duty >= 0.5 ? 1 : 0;
    out.push_back(rec);
  }
  return out;
}

std::size_t TrainingSet::on_period_steps() const noexcept {
  return static_cast<std::size_t>(std::count(on_period.begin(), on_period.end(), true));
}

namespace {

std::int64_t median_delta(std::span<const HvacSample> samples) {
  std::vector<std::int64_t> d;
  d.reserve(samples.size());
  for (std::size_t i = 1; i < samples.size(); ++i) d.push_back(samples[i].timestamp - samples[i - 1].timestamp);
  if (d.empty()) return 0;
  std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(d.size() / 2), d.end());
  return d[d.size() / 2];
}

std::vector<bool> on_period_mask(const std::vector<StepRecord>& steps, std::int64_t step_s, std::size_t max_idle) {
  const std::size_t n = steps.size();
  std::vector<bool> mask(n, false);
  for (std::size_t i = 0; i < n; ++i) mask[i] = steps[i].duty > 0.0;
  for (std::size_t i = 0; i < n;) {
    if (mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && steps[j].duty == 0.0) ++j;
    const bool bounded = i > 0 && j < n;
    const bool contiguous = bounded && steps[j].timestamp - steps[i - 1].timestamp ==
                                           static_cast<std::int64_t>(j - i + 1) * step_s;
    if (bounded && contiguous && j - i <= max_idle) {
      for (std::size_t k = i; k < j; ++k) mask[k] = true;
    }
    i = j;
  }
  return mask;
}

std::size_t split_rows(std::size_t rows, double fraction) {
  const auto train = static_cast<std::size_t>(std::floor(static_cast<double>(rows) * fraction));
  return std::clamp<std::size_t>(train, 1, rows);
}

}  // namespace

TrainingSet prepare_training_set(std::span<const HvacSample> samples, const TrainingOptions& options) {
  if (samples.empty()) throw Error(ErrorCode::EmptyInput, "no telemetry");
  if (!(options.train_fraction > 0.0 && options.train_fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidParameters, "train_fraction must be in (0, 1]");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].timestamp <= samples[i - 1].timestamp) {
      throw Error(ErrorCode::NonMonotonicTimestamps, "telemetry must be time-ordered");
    }
  }
  if (median_delta(samples) > options.step_s) {
    throw Error(ErrorCode::InvalidParameters, "step is finer than the telemetry resolution");
  }

  TrainingSet set;
  set.step_s = options.step_s;
  set.steps = aggregate_steps(samples, options.step_s);
  set.on_period = on_period_mask(set.steps, options.step_s, options.max_idle_steps);
  if (set.on_period_steps() < options.min_on_steps) {
    throw Error(ErrorCode::InsufficientOnTime, "only " + std::to_string(set.on_period_steps()) +
                                                   " ON-period steps, need " + std::to_string(options.min_on_steps));
  }

  const auto& st = set.steps;
  double on_delta = 0.0;
  std::size_t on_rows = 0;
  for (std::size_t k = 0; k + 1 < st.size(); ++k) {
    if (st[k + 1].timestamp - st[k].timestamp != options.step_s) continue;
    const double delta = st[k + 1].indoor_c - st[k].indoor_c;
    if (set.on_period[k]) {
      const double f[kThermalFeatureCount] = {st[k].indoor_c, st[k].outdoor_c, st[k].duty};
      set.thermal_features.append_row(f);
      set.thermal_targets.push_back(delta);
      if (st[k].state == 1) {
        on_delta += delta;
        ++on_rows;
      }
    }
    const double g[kStateFeatureCount] = {st[k + 1].indoor_c, st[k + 1].set_c, st[k + 1].indoor_c - st[k + 1].set_c,
                                          static_cast<double>(st[k].state), st[k].outdoor_c};
    set.state_features.append_row(g);
    set.state_targets.push_back(st[k + 1].state);
  }
  if (set.thermal_targets.empty()) throw Error(ErrorCode::InsufficientOnTime, "no consecutive ON-period steps");
  set.mode = on_rows > 0 && on_delta > 0.0 ? HvacMode::heating : HvacMode::cooling;
  set.thermal_train_rows = split_rows(set.thermal_targets.size(), options.train_fraction);
  set.state_train_rows = split_rows(set.state_targets.size(), options.train_fraction);
  set.thermal_normalization =
      NormalizationSpec::fit(set.thermal_features, options.normalization, set.thermal_train_rows);
  return set;
}

RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> predicted) {
  RegressionMetrics m;
  m.rows = std::min(truth.size(), predicted.size());
  if (m.rows == 0) return m;
  double mean = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) mean += truth[i];
  mean /= static_cast<double>(m.rows);
  double abs_err = 0.0, ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double e = truth[i] - predicted[i];
    abs_err += std::abs(e);
    ss_res += e * e;
    ss_tot += (truth[i] - mean) * (truth[i] - mean);
  }
  m.mae = abs_err / static_cast<double>(m.rows);
  m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return m;
}

ThermalModel::ThermalModel(std::vector<double> coefficients, NormalizationSpec normalization,
                           RegressionMetrics metrics, bool ridge_fallback, HvacMode mode)
    : coefficients_(std::move(coefficients)),
      normalization_(std::move(normalization)),
      metrics_(metrics),
      ridge_fallback_(ridge_fallback),
      mode_(mode) {
  if (coefficients_.size() != normalization_.feature_count() + 1) {
    throw Error(ErrorCode::ModelFormat, "coefficient count must be feature count + 1");
  }
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw Error(ErrorCode::ModelFormat, "non-finite coefficient");
  }
}

double ThermalModel::predict(std::span<const double> raw_features) const {
  const auto& p = normalization_.params();
  if (raw_features.size() != p.size()) throw Error(ErrorCode::InvalidParameters, "feature count mismatch");
  double y = coefficients_.back();
  for (std::size_t j = 0; j < p.size(); ++j) y += coefficients_[j] * (raw_features[j] - p[j].offset) / p[j].scale;
  return y;
}

double ThermalModel::predict_delta(double indoor_c, double outdoor_c, int state) const {
  const double f[kThermalFeatureCount] = {indoor_c, outdoor_c, static_cast<double>(state)};
  return predict(f);
}

std::vector<double> ThermalModel::raw_coefficients() const {
  const auto& p = normalization_.params();
  std::vector<double> raw(coefficients_.size());
  double bias = coefficients_.back();
  for (std::size_t j = 0; j < p.size(); ++j) {
    raw[j] = coefficients_[j] / p[j].scale;
    bias -= coefficients_[j] * p[j].offset / p[j].scale;
  }
  raw.back() = bias;
  return raw;
}

ThermalModel train_thermal(const Matrix& features, std::span<const double> targets, std::size_t train_rows,
                           const NormalizationSpec& normalization, HvacMode mode) {
  constexpr std::size_t kMinRows = 100;
  if (features.rows() != targets.size()) throw Error(ErrorCode::InvalidParameters, "features/targets misaligned");
  if (features.rows() < kMinRows) {
    throw Error(ErrorCode::InsufficientOnTime, "thermal model needs at least 100 rows");
  }
  if (normalization.feature_count() != features.cols()) {
    throw Error(ErrorCode::InvalidNormalization, "normalization does not match feature count");
  }
  train_rows = std::clamp<std::size_t>(train_rows, 1, features.rows());
  const std::size_t d = features.cols();

  Eigen::MatrixXd x(static_cast<Eigen::Index>(train_rows), static_cast<Eigen::Index>(d + 1));
  Eigen::VectorXd y(static_cast<Eigen::Index>(train_rows));
  std::vector<double> row(d);
  for (std::size_t r = 0; r < train_rows; ++r) {
    std::copy(features.row(r).begin(), features.row(r).end(), row.begin());
    normalization.apply(row);
    for (std::size_t j = 0; j < d; ++j) x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = row[j];
    x(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) = 1.0;
    y(static_cast<Eigen::Index>(r)) = targets[r];
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  Eigen::VectorXd w;
  bool ridge = false;
  if (static_cast<std::size_t>(qr.rank()) == d + 1) {
    w = qr.solve(y);
  } else {
    ridge = true;
    Eigen::MatrixXd gram = x.transpose() * x;
    for (std::size_t j = 0; j < d; ++j) {
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) += kRidgeDamping;
    }
    // The bias stays unpenalized; a tiny jitter keeps the system definite if
    // every feature column is also constant.
    gram(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) += 1e-12;
    w = gram.ldlt().solve(x.transpose() * y);
  }

  std::vector<double> coefficients(w.data(), w.data() + w.size());
  ThermalModel fitted(coefficients, normalization, {}, ridge, mode);

  const std::size_t eval_first = train_rows < features.rows() ? train_rows : 0;
  std::vector<double> truth, predicted;
  for (std::size_t r = eval_first; r < features.rows(); ++r) {
    truth.push_back(targets[r]);
    predicted.push_back(fitted.predict(features.row(r)));
  }
  return ThermalModel(std::move(coefficients), normalization, regression_metrics(truth, predicted), ridge, mode);
}

ThermalModel train_thermal(const TrainingSet& set) {
  return train_thermal(set.thermal_features, set.thermal_targets, set.thermal_train_rows, set.thermal_normalization,
                       set.mode);
}

int StatePredictor::predict_next(double predicted_indoor_c, double set_temp_c, int previous_state,
                                 double outdoor_c) const {
  const double f[kStateFeatureCount] = {predicted_indoor_c, set_temp_c, predicted_indoor_c - set_temp_c,
                                        static_cast<double>(previous_state), outdoor_c};
  return forest_.predict(f);
}

StatePredictor train_state_predictor(const Matrix& features, std::span<const int> targets, std::size_t train_rows,
                                     const ForestParams& params) {
  if (features.rows() != targets.size() || features.rows() == 0) {
    throw Error(ErrorCode::InvalidParameters, "features/targets misaligned or empty");
  }
  train_rows = std::clamp<std::size_t>(train_rows, 1, features.rows());
  const auto train_targets = targets.first(train_rows);
  const auto ones = std::count(train_targets.begin(), train_targets.end(), 1);
  if (ones == 0 || static_cast<std::size_t>(ones) == train_rows) {
    throw Error(ErrorCode::SingleClassTraining, "training targets contain a single class");
  }
  auto forest = RandomForest::train(features.slice_rows(0, train_rows), train_targets, params);

  const std::size_t eval_first = train_rows < features.rows() ? train_rows : 0;
  std::vector<int> truth, predicted;
  for (std::size_t r = eval_first; r < features.rows(); ++r) {
    truth.push_back(targets[r]);
    predicted.push_back(forest.predict(features.row(r)));
  }
  return StatePredictor(std::move(forest), classification_metrics(truth, predicted));
}

StatePredictor train_state_predictor(const TrainingSet& set, const ForestParams& params) {
  return train_state_predictor(set.state_features, set.state_targets, set.state_train_rows, params);
}

RolloutResult rollout(const ThermalPredictor& thermal, const StateClassifier& classifier, const HvacSample& initial,
                      double set_temp_c, std::size_t horizon_steps, std::span<const double> outdoor_forecast,
                      double rated_power_kw, std::int64_t step_s) {
  if (horizon_steps == 0) throw Error(ErrorCode::HorizonZero, "horizon must be at least one step");
  if (!outdoor_forecast.empty() && outdoor_forecast.size() < horizon_steps) {
    throw Error(ErrorCode::InvalidParameters, "outdoor forecast shorter than the horizon");
  }
  if (step_s <= 0 || !(rated_power_kw >= 0.0)) throw Error(ErrorCode::InvalidParameters, "invalid step or rating");

  RolloutResult out;
  out.states.reserve(horizon_steps);
  out.indoor_c.reserve(horizon_steps);
  double indoor = initial.indoor_temp_c;
  int state = initial.hvac_state;
  for (std::size_t j = 0; j < horizon_steps; ++j) {
    const double outdoor = outdoor_forecast.empty() ? initial.outdoor_temp_c : outdoor_forecast[j];
    indoor += thermal.predict_delta(indoor, outdoor, state);
    state = classifier.predict_next(indoor, set_temp_c, state, outdoor) == 1 ? 1 : 0;
    out.indoor_c.push_back(indoor);
    out.states.push_back(state);
  }
  const double hours = static_cast<double>(step_s) / 3600.0;
  std::size_t on_steps = 0;
  for (int s : out.states) on_steps += static_cast<std::size_t>(s);
  out.energy_kwh = static_cast<double>(on_steps) * rated_power_kw * hours;
  return out;
}

FlexibilityForecast forecast_flexibility(const ThermalPredictor& thermal, const StateClassifier& classifier,
                                         const HvacSample& initial, const ForecastRequest& request) {
  if (request.baseline_set_temp_c == request.flex_set_temp_c) {
    throw Error(ErrorCode::InvalidSetpoints, "baseline and flexibility setpoints must differ");
  }
  const auto base = rollout(thermal, classifier, initial, request.baseline_set_temp_c, request.horizon_steps,
                            request.outdoor_forecast, request.rated_power_kw, request.step_s);
  const auto flex = rollout(thermal, classifier, initial, request.flex_set_temp_c, request.horizon_steps,
                            request.outdoor_forecast, request.rated_power_kw, request.step_s);
  FlexibilityForecast f;
  f.device_id = request.device_id;
  f.start_time = initial.timestamp + request.step_s;
  f.step_s = request.step_s;
  f.horizon_steps = request.horizon_steps;
  f.direction = request.direction;
  f.baseline_set_temp_c = request.baseline_set_temp_c;
  f.flex_set_temp_c = request.flex_set_temp_c;
  f.rated_power_kw = request.rated_power_kw;
  f.baseline_states = base.states;
  f.flex_states = flex.states;
  f.available_flex_kw.resize(request.horizon_steps);
  for (std::size_t j = 0; j < request.horizon_steps; ++j) {
    const double p_base = base.states[j] * request.rated_power_kw;
    const double p_flex = flex.states[j] * request.rated_power_kw;
    const double delta = request.direction == FlexDirection::downward ? p_base - p_flex : p_flex - p_base;
    f.available_flex_kw[j] = std::max(0.0, delta);
  }
  return f;
}

HvacModelPair train_hvac_models(std::string device_id, double rated_power_kw, std::span<const HvacSample> samples,
                                const HvacTrainingConfig& config) {
  if (!(rated_power_kw > 0.0)) throw Error(ErrorCode::InvalidParameters, "rated power must be positive");
  const auto set = prepare_training_set(samples, config.training);
  HvacModelPair pair;
  pair.device_id = std::move(device_id);
  pair.rated_power_kw = rated_power_kw;
  pair.step_s = config.training.step_s;
  pair.thermal = train_thermal(set);
  pair.state = train_state_predictor(set, config.forest);
  pair.seed = config.forest.seed;
  pair.thermal_rows = set.thermal_targets.size();
  pair.state_rows = set.state_targets.size();
  pair.created_by = "flexkit";
  return pair;
}

HvacSample forecast_origin(std::span<const HvacSample> samples, std::int64_t step_s, std::optional<EpochSeconds> at) {
  const auto steps = aggregate_steps(samples, step_s);
  const StepRecord* chosen = nullptr;
  for (const auto& s : steps) {
    if (at && s.timestamp > *at) break;
    chosen = &s;
  }
  if (!chosen) throw Error(ErrorCode::NotFound, "no telemetry at or before the requested origin");
  HvacSample h;
  h.timestamp = chosen->timestamp;
  h.indoor_temp_c = chosen->indoor_c;
  h.outdoor_temp_c = chosen->outdoor_c;
  h.set_temp_c = chosen->set_c;
  h.hvac_state = chosen->state;
  h.hvac_power_w = chosen->power_w;
  return h;
}

}  // namespace flexkit
