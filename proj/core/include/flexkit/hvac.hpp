#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/baseline.hpp"
#include "flexkit/csv.hpp"
#include "flexkit/forest.hpp"
#include "flexkit/matrix.hpp"
#include "flexkit/time_utils.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

struct HvacSample {
  EpochSeconds timestamp = 0;
  double indoor_temp_c = 0.0;
  double outdoor_temp_c = 0.0;
  double hvac_power_w = 0.0;
  int hvac_state = 0;  // 1 = compressor on
  double set_temp_c = 0.0;

  bool operator==(const HvacSample&) const = default;
};

inline constexpr double kDefaultStandbyW = 50.0;
inline constexpr double kMinPhysicalTempC = -40.0;
inline constexpr double kMaxPhysicalTempC = 60.0;

/// Throws `InvalidSample` on out-of-range temperatures, negative power, a
/// state outside {0, 1}, or an ON state drawing no more than `standby_w`.
void validate_sample(const HvacSample& sample, double standby_w = kDefaultStandbyW);

/// Telemetry CSV `timestamp,indoor_c,outdoor_c,power_w,state,set_temp_c`.
struct HvacCsv {
  std::vector<HvacSample> samples;
  std::vector<std::size_t> lines;  // source line of each sample
  std::vector<RowError> errors;
};
HvacCsv parse_hvac_csv(std::string_view text, double standby_w = kDefaultStandbyW);
std::string format_hvac_csv(std::span<const HvacSample> samples);

enum class HvacMode { cooling, heating };
std::string_view to_string(HvacMode mode) noexcept;
std::optional<HvacMode> parse_hvac_mode(std::string_view text) noexcept;

/// Telemetry aggregated to one control step. Temperatures are the first
/// reading in the step; `duty` is the ON share of the step's readings and
/// `state` is `duty >= 0.5`.
struct StepRecord {
  EpochSeconds timestamp = 0;
  double indoor_c = 0.0;
  double outdoor_c = 0.0;
  double set_c = 0.0;
  double duty = 0.0;
  double power_w = 0.0;
  int state = 0;
};

std::vector<StepRecord> aggregate_steps(std::span<const HvacSample> samples, std::int64_t step_s);

struct TrainingOptions {
  std::int64_t step_s = 900;
  double train_fraction = 0.8;
  std::size_t min_on_steps = 100;
  /// OFF runs of at most this many steps between two ON steps count as part
  /// of the surrounding ON period (thermostat idling between cycles).
  std::size_t max_idle_steps = 8;
  NormalizationMethod normalization = NormalizationMethod::min_max;
};

inline constexpr std::size_t kThermalFeatureCount = 3;  // indoor_c, outdoor_c, state
inline constexpr std::size_t kStateFeatureCount = 5;    // predicted indoor, set, indoor - set, prev state, outdoor

/// Feature tables for both models with a chronological train/test split.
///
/// Thermal rows cover ON-period steps: features (indoor, outdoor, duty) at
/// step k, target indoor[k+1] - indoor[k]. State rows cover every pair of
/// consecutive steps: features (indoor[k+1], set[k+1], indoor[k+1] -
/// set[k+1], state[k], outdoor[k]), target state[k+1]. The first
/// `train_fraction` of each table (in time order) is the training split.
struct TrainingSet {
  std::int64_t step_s = 900;
  std::vector<StepRecord> steps;
  std::vector<bool> on_period;

  Matrix thermal_features;
  std::vector<double> thermal_targets;
  std::size_t thermal_train_rows = 0;
  NormalizationSpec thermal_normalization;

  Matrix state_features;
  std::vector<int> state_targets;
  std::size_t state_train_rows = 0;

  HvacMode mode = HvacMode::cooling;
  std::size_t on_period_steps() const noexcept;
};

/// Throws `InsufficientOnTime` below `min_on_steps` ON-period steps and
/// `InvalidParameters` when `step_s` is finer than the telemetry.
TrainingSet prepare_training_set(std::span<const HvacSample> samples, const TrainingOptions& options = {});

struct RegressionMetrics {
  double mae = 0.0;
  double r2 = 0.0;
  std::size_t rows = 0;

  bool operator==(const RegressionMetrics&) const = default;
};

RegressionMetrics regression_metrics(std::span<const double> truth, std::span<const double> predicted);

/// One-step temperature change predictor used by `rollout`.
class ThermalPredictor {
 public:
  virtual ~ThermalPredictor() = default;
  virtual double predict_delta(double indoor_c, double outdoor_c, int state) const = 0;

  bool operator==(const ThermalPredictor&) const = default;
};

/// Next on/off state given the predicted indoor temperature.
class StateClassifier {
 public:
  virtual ~StateClassifier() = default;
  virtual int predict_next(double predicted_indoor_c, double set_temp_c, int previous_state,
                           double outdoor_c) const = 0;

  bool operator==(const StateClassifier&) const = default;
};

inline constexpr double kRidgeDamping = 1e-6;

/// Affine model over normalized features; coefficients end with the bias.
class ThermalModel : public ThermalPredictor {
 public:
  ThermalModel() = default;
  ThermalModel(std::vector<double> coefficients, NormalizationSpec normalization, RegressionMetrics metrics,
               bool ridge_fallback, HvacMode mode);

  double predict(std::span<const double> raw_features) const;
  double predict_delta(double indoor_c, double outdoor_c, int state) const override;

  /// Coefficients mapped back to raw feature units, bias last.
  std::vector<double> raw_coefficients() const;

  const std::vector<double>& coefficients() const noexcept { return coefficients_; }
  const NormalizationSpec& normalization() const noexcept { return normalization_; }
  const RegressionMetrics& train_metrics() const noexcept { return metrics_; }
  bool ridge_fallback() const noexcept { return ridge_fallback_; }
  HvacMode mode() const noexcept { return mode_; }

  bool operator==(const ThermalModel&) const = default;

 private:
  std::vector<double> coefficients_;
  NormalizationSpec normalization_;
  RegressionMetrics metrics_;
  bool ridge_fallback_ = false;
  HvacMode mode_ = HvacMode::cooling;
};

/// Ordinary least squares on the first `train_rows` rows; metrics on the
/// remaining rows (on the training rows when there are none). A
/// rank-deficient design falls back to ridge with `kRidgeDamping` and sets
/// `ridge_fallback()`. Throws `InsufficientOnTime` below 100 rows.
ThermalModel train_thermal(const Matrix& features, std::span<const double> targets, std::size_t train_rows,
                           const NormalizationSpec& normalization, HvacMode mode = HvacMode::cooling);
ThermalModel train_thermal(const TrainingSet& set);

class StatePredictor : public StateClassifier {
 public:
  StatePredictor() = default;
  StatePredictor(RandomForest forest, ClassificationMetrics metrics)
      : forest_(std::move(forest)), metrics_(metrics) {}

  int predict(std::span<const double> features) const { return forest_.predict(features); }
  int predict_next(double predicted_indoor_c, double set_temp_c, int previous_state,
                   double outdoor_c) const override;

  const RandomForest& forest() const noexcept { return forest_; }
  const ClassificationMetrics& train_metrics() const noexcept { return metrics_; }

  bool operator==(const StatePredictor&) const = default;

 private:
  RandomForest forest_;
  ClassificationMetrics metrics_;
};

/// Throws `SingleClassTraining` when the training split holds one class.
StatePredictor train_state_predictor(const Matrix& features, std::span<const int> targets, std::size_t train_rows,
                                     const ForestParams& params = {});
StatePredictor train_state_predictor(const TrainingSet& set, const ForestParams& params = {});

struct RolloutResult {
  std::vector<int> states;          // state during each horizon step
  std::vector<double> indoor_c;     // indoor temperature at the start of each horizon step
  double energy_kwh = 0.0;
};

/// Alternates the two models from `initial` for `horizon_steps` steps.
///
/// Iteration j applies the thermal model to the current (indoor, outdoor,
/// state) and then asks the classifier for the state during step j given
/// the new indoor temperature. `outdoor_forecast[j]` is the outdoor
/// temperature for iteration j; an empty forecast holds the initial reading.
/// Energy is sum(states) * rated_power_kw * step_s / 3600.
RolloutResult rollout(const ThermalPredictor& thermal, const StateClassifier& classifier, const HvacSample& initial,
                      double set_temp_c, std::size_t horizon_steps, std::span<const double> outdoor_forecast,
                      double rated_power_kw, std::int64_t step_s);

struct FlexibilityForecast {
  std::string device_id;
  EpochSeconds start_time = 0;  // first forecast step
  std::int64_t step_s = 900;
  std::size_t horizon_steps = 0;
  FlexDirection direction = FlexDirection::downward;
  double baseline_set_temp_c = 0.0;
  double flex_set_temp_c = 0.0;
  double rated_power_kw = 0.0;
  std::vector<double> available_flex_kw;
  std::vector<int> baseline_states;
  std::vector<int> flex_states;

  /// Step index on the absolute grid `floor(t / step_s)`.
  std::int64_t start_step() const noexcept { return floor_div(start_time, step_s); }
  bool operator==(const FlexibilityForecast&) const = default;
};

struct ForecastRequest {
  std::string device_id;
  double baseline_set_temp_c = 24.0;
  double flex_set_temp_c = 26.0;
  std::size_t horizon_steps = 12;
  std::int64_t step_s = 900;
  double rated_power_kw = 1.0;
  FlexDirection direction = FlexDirection::downward;
  std::vector<double> outdoor_forecast;
};

/// Rolls out at both setpoints. Per step, downward flexibility is
/// max(0, P_baseline - P_flex) and upward is max(0, P_flex - P_baseline).
/// Throws `InvalidSetpoints` when the two setpoints are equal.
FlexibilityForecast forecast_flexibility(const ThermalPredictor& thermal, const StateClassifier& classifier,
                                         const HvacSample& initial, const ForecastRequest& request);

/// A trained model pair with the provenance stored in its artifact.
struct HvacModelPair {
  std::string device_id;
  double rated_power_kw = 1.0;
  std::int64_t step_s = 900;
  ThermalModel thermal;
  StatePredictor state;
  std::uint64_t seed = 42;
  std::size_t thermal_rows = 0;
  std::size_t state_rows = 0;
  std::string created_by;

  bool operator==(const HvacModelPair&) const = default;
};

struct HvacTrainingConfig {
  TrainingOptions training;
  ForestParams forest;
};

HvacModelPair train_hvac_models(std::string device_id, double rated_power_kw, std::span<const HvacSample> samples,
                                const HvacTrainingConfig& config = {});

/// The step record to start a forecast from: the last complete step at or
/// before `at` (the last step overall when `at` is unset).
HvacSample forecast_origin(std::span<const HvacSample> samples, std::int64_t step_s,
                           std::optional<EpochSeconds> at = std::nullopt);

inline constexpr std::string_view kModelFormat = "flexkit-hvac-model";
inline constexpr int kModelFormatMajor = 1;
inline constexpr int kModelFormatMinor = 0;

/// Versioned JSON artifact; see docs/model-format.md.
std::string serialize_model(const HvacModelPair& model);
/// Accepts any minor version of the current major. Throws `ModelFormat`.
HvacModelPair parse_model(std::string_view text);

}  // namespace flexkit
