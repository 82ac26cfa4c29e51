#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "flexkit/matrix.hpp"
#include "flexkit/time_utils.hpp"

namespace flexkit {

enum class EnergyUnit { Wh, kWh, W, kW };

std::string_view to_string(EnergyUnit unit) noexcept;
std::optional<EnergyUnit> parse_energy_unit(std::string_view text) noexcept;

/// Converts one reading to Wh per interval. Power units are integrated over
/// `interval_s`.
double to_wh(double value, EnergyUnit unit, std::int64_t interval_s) noexcept;

/// Inclusive index range `[first, last]`.
struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;

  std::size_t length() const noexcept { return last - first + 1; }
  bool operator==(const IndexRange&) const = default;
};

struct Reading {
  EpochSeconds timestamp = 0;
  double value = 0.0;
  EnergyUnit unit = EnergyUnit::Wh;
};

/// Uniformly sampled energy series in Wh per interval.
///
/// Missing grid points are listed in `gaps()` and hold 0 in `values()`.
/// Instances are immutable; every transform returns a new series.
class MeterSeries {
 public:
  /// Throws `Error` if the interval is not positive, a value is negative or
  /// non-finite, or the gap ranges are unsorted, overlapping or out of range.
  MeterSeries(EpochSeconds start_time, std::int64_t sampling_interval_s,
              std::vector<double> values_wh, std::vector<IndexRange> gaps = {});

  EpochSeconds start_time() const noexcept { return start_; }
  std::int64_t sampling_interval_s() const noexcept { return interval_s_; }
  double sampling_frequency_hz() const noexcept { return 1.0 / static_cast<double>(interval_s_); }
  EnergyUnit unit() const noexcept { return EnergyUnit::Wh; }

  std::span<const double> values() const noexcept { return values_; }
  const std::vector<IndexRange>& gaps() const noexcept { return gaps_; }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  bool has_gaps() const noexcept { return !gaps_.empty(); }
  bool is_gap(std::size_t index) const noexcept;
  std::size_t gap_count() const noexcept;

  EpochSeconds time_at(std::size_t index) const noexcept {
    return start_ + static_cast<EpochSeconds>(index) * interval_s_;
  }
  /// One past the last interval.
  EpochSeconds end_time() const noexcept { return time_at(values_.size()); }

  /// Sub-series `[first, first + count)`; gaps are re-based.
  MeterSeries slice(std::size_t first, std::size_t count) const;

  bool operator==(const MeterSeries&) const = default;

 private:
  EpochSeconds start_;
  std::int64_t interval_s_;
  std::vector<double> values_;
  std::vector<IndexRange> gaps_;
};

struct ValidationOptions {
  /// Used only when fewer than two readings make the grid unobservable.
  std::optional<std::int64_t> interval_hint_s;
  /// Minimum share of deltas that must equal the modal delta.
  double uniformity_threshold = 0.95;
};

struct ValidationReport {
  std::size_t off_grid_dropped = 0;
  std::size_t missing_points = 0;
};

/// Infers a uniform grid from strictly increasing readings.
///
/// The grid step is the modal timestamp delta (smallest wins ties) and must
/// explain at least `uniformity_threshold` of all deltas. Readings that do
/// not sit on the grid anchored at the first timestamp are dropped and their
/// grid points become gaps. Values are converted to Wh per interval.
MeterSeries validate_series(std::span<const Reading> raw, const ValidationOptions& options = {},
                            ValidationReport* report = nullptr);

/// The non-gap points of `series` as Wh readings. `validate_series` on the
/// result reproduces `series` when it has at least two points.
std::vector<Reading> to_readings(const MeterSeries& series);

enum class ResampleMode { sum, mean, last };

/// Down-samples to `target_interval_s`, an integer multiple of the current
/// interval. A trailing incomplete window is dropped; any window touching a
/// gap becomes a gap.
MeterSeries resample(const MeterSeries& series, std::int64_t target_interval_s, ResampleMode mode);

enum class GapPolicy { drop_segment, linear_interp };

/// `drop_segment` keeps the longest gap-free run (earliest on ties).
/// `linear_interp` trims leading and trailing gaps and interpolates interior
/// ones. The result never has gaps.
MeterSeries fill_gaps(const MeterSeries& series, GapPolicy policy);

enum class NormalizationMethod { min_max, z_score };

struct FeatureScale {
  double offset = 0.0;
  double scale = 1.0;
  bool operator==(const FeatureScale&) const = default;
};

/// Per-column affine normalization `(x - offset) / scale`.
class NormalizationSpec {
 public:
  NormalizationSpec() = default;
  /// Throws `InvalidNormalization` if any scale is zero or non-finite.
  NormalizationSpec(NormalizationMethod method, std::vector<FeatureScale> params);

  /// Fits on the first `row_count` rows (all rows when omitted). Constant
  /// columns get scale 1 so the spec stays invertible.
  static NormalizationSpec fit(const Matrix& features, NormalizationMethod method,
                               std::optional<std::size_t> row_count = std::nullopt);

  NormalizationMethod method() const noexcept { return method_; }
  const std::vector<FeatureScale>& params() const noexcept { return params_; }
  std::size_t feature_count() const noexcept { return params_.size(); }

  void apply(std::span<double> row) const;
  void invert(std::span<double> row) const;
  Matrix apply(const Matrix& features) const;
  Matrix invert(const Matrix& features) const;

  bool operator==(const NormalizationSpec&) const = default;

 private:
  NormalizationMethod method_ = NormalizationMethod::min_max;
  std::vector<FeatureScale> params_;
};

std::string_view to_string(NormalizationMethod method) noexcept;
std::optional<NormalizationMethod> parse_normalization_method(std::string_view text) noexcept;

}  // namespace flexkit
