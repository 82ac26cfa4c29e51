#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/clustering.hpp"
#include "flexkit/spectral.hpp"
#include "flexkit/time_utils.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

enum class MediumRule { median, mean };
enum class FlexDirection { upward, downward };
enum class ClusteringSpace { per_slot, month_2d };

std::string_view to_string(MediumRule rule) noexcept;
std::string_view to_string(FlexDirection direction) noexcept;
std::optional<FlexDirection> parse_flex_direction(std::string_view text) noexcept;
std::optional<MediumRule> parse_medium_rule(std::string_view text) noexcept;

/// Essential-load floor and flexible-device ceiling observed for the
/// industrial case study; used as configuration defaults only.
inline constexpr double kDefaultLowLoadFloorWh = 500.0;
inline constexpr double kDefaultHighLoadCeilingWh = 2500.0;
inline constexpr double kMaxAdjustmentFraction = 0.10;

struct BaselineOptions {
  DbscanParams dbscan{500.0, 5};
  /// Tune epsilon per slot with `tune_epsilon(values, min_points)`.
  bool auto_epsilon = false;
  double low_load_floor_wh = kDefaultLowLoadFloorWh;
  /// Clusters whose mean exceeds the ceiling are excluded as well; unset
  /// disables the check.
  std::optional<double> high_load_ceiling_wh = kDefaultHighLoadCeilingWh;
  MediumRule medium = MediumRule::median;
  ClusteringSpace space = ClusteringSpace::per_slot;
  std::size_t min_cycles = 7;
};

struct SlotBaseline {
  double min_wh = 0.0;
  double medium_wh = 0.0;
  double max_wh = 0.0;
  bool fallback = false;
  std::size_t samples = 0;
  std::size_t outliers = 0;
  double epsilon_wh = 0.0;

  bool operator==(const SlotBaseline&) const = default;
};

struct ExcludedCluster {
  std::size_t slot = 0;  // for month_2d clustering: the cluster's first slot
  int cluster_id = 0;
  double mean_wh = 0.0;
  bool above_ceiling = false;

  bool operator==(const ExcludedCluster&) const = default;
};

struct BaselineSet {
  YearMonth month;
  std::size_t slots_per_cycle = 0;
  std::int64_t sampling_interval_s = 0;
  std::vector<SlotBaseline> slots;
  std::vector<ExcludedCluster> excluded_low_clusters;
  std::size_t outlier_count = 0;
  MediumRule medium_rule = MediumRule::median;
  double low_load_floor_wh = kDefaultLowLoadFloorWh;
  std::optional<double> high_load_ceiling_wh;
  DbscanParams dbscan;
  bool auto_epsilon = false;

  std::size_t fallback_count() const noexcept;
  bool operator==(const BaselineSet&) const = default;
};

/// Per-slot min/medium/max baselines for one month.
///
/// Each slot's values are clustered; noise points and clusters whose mean
/// falls below the floor (or above the ceiling) are discarded, and the
/// survivors give min, medium and max. Slots with no survivors fall back to
/// the 10th/50th/90th percentiles of their raw values and are flagged.
/// Throws `InsufficientCycles` below `min_cycles` full cycles and
/// `EmptyAfterExclusion` when every slot falls back.
BaselineSet derive_baselines(const MeterSeries& series, const SegmentationRule& segmentation,
                             const BaselineOptions& options = {});

struct FlexibilityBand {
  FlexDirection direction = FlexDirection::downward;
  double adjustment_fraction = kMaxAdjustmentFraction;
  std::vector<double> available_flex_wh;

  bool operator==(const FlexibilityBand&) const = default;
};

/// Per slot, with adj = fraction * (max - medium):
///   downward = (medium - min) + adj,  upward = (max - medium) + adj,
/// each clipped to [0, max - min]. Throws `FractionOutOfRange` unless
/// 0 < fraction <= 0.10.
FlexibilityBand flexibility_band(const BaselineSet& baselines, FlexDirection direction,
                                 double adjustment_fraction);

/// `slot,min_wh,medium_wh,max_wh,fallback`
std::string format_baseline_csv(const BaselineSet& baselines);
/// `slot,direction,available_flex_wh`
std::string format_band_csv(const FlexibilityBand& band);

/// Linear-interpolated percentile (q in [0, 1]) of an unsorted sample.
double percentile(std::vector<double> values, double q);

}  // namespace flexkit
