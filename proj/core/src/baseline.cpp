#include "flexkit/baseline.hpp"

#include <algorithm>
#include <cmath>

#include "flexkit/error.hpp"
#include "flexkit/number_format.hpp"

namespace flexkit {

std::string_view to_string(MediumRule rule) noexcept { return rule == MediumRule::median ? "median" : "mean"; }

std::string_view to_string(FlexDirection direction) noexcept {
  return direction == FlexDirection::upward ? "upward" : "downward";
}

std::optional<FlexDirection> parse_flex_direction(std::string_view text) noexcept {
  if (text == "upward") return FlexDirection::upward;
  if (text == "downward") return FlexDirection::downward;
  return std::nullopt;
}

std::optional<MediumRule> parse_medium_rule(std::string_view text) noexcept {
  if (text == "median") return MediumRule::median;
  if (text == "mean") return MediumRule::mean;
  return std::nullopt;
}

std::size_t BaselineSet::fallback_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(slots.begin(), slots.end(), [](const SlotBaseline& s) { return s.fallback; }));
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (values[hi] - values[lo]) * (pos - static_cast<double>(lo));
}

namespace {

bool excluded(const ClusterStats& c, const BaselineOptions& o) {
  if (c.mean < o.low_load_floor_wh) return true;
  return o.high_load_ceiling_wh && c.mean > *o.high_load_ceiling_wh;
}

SlotBaseline summarize(std::vector<double> survivors, const std::vector<double>& raw, MediumRule rule) {
  SlotBaseline s;
  s.samples = raw.size();
  if (survivors.empty()) {
    s.fallback = true;
    s.min_wh = percentile(raw, 0.10);
    s.medium_wh = percentile(raw, 0.50);
    s.max_wh = percentile(raw, 0.90);
    return s;
  }
  std::sort(survivors.begin(), survivors.end());
  s.min_wh = survivors.front();
  s.max_wh = survivors.back();
  if (rule == MediumRule::median) {
    s.medium_wh = percentile(survivors, 0.5);
  } else {
    double acc = 0.0;
    for (double v : survivors) acc += v;
    s.medium_wh = std::clamp(acc / static_cast<double>(survivors.size()), s.min_wh, s.max_wh);
  }
  return s;
}

}  // namespace

BaselineSet derive_baselines(const MeterSeries& series, const SegmentationRule& segmentation,
                             const BaselineOptions& options) {
  if (series.empty()) throw Error(ErrorCode::EmptyInput, "empty series");
  if (segmentation.sampling_interval_s != series.sampling_interval_s()) {
    throw Error(ErrorCode::IncompatibleIntervals, "segmentation interval differs from series interval");
  }
  if (options.low_load_floor_wh < 0.0) throw Error(ErrorCode::InvalidParameters, "floor must be >= 0");
  const std::size_t slots = segmentation.slots_per_cycle;
  const std::size_t cycles = series.size() / slots;
  if (cycles < options.min_cycles) {
    throw Error(ErrorCode::InsufficientCycles, "series covers " + std::to_string(cycles) + " full cycles, need " +
                                                   std::to_string(options.min_cycles));
  }

  BaselineSet out;
  out.month = YearMonth::of(series.start_time());
  out.slots_per_cycle = slots;
  out.sampling_interval_s = series.sampling_interval_s();
  out.medium_rule = options.medium;
  out.low_load_floor_wh = options.low_load_floor_wh;
  out.high_load_ceiling_wh = options.high_load_ceiling_wh;
  out.dbscan = options.dbscan;
  out.auto_epsilon = options.auto_epsilon;
  out.slots.resize(slots);

  std::vector<std::vector<double>> by_slot(slots);
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.is_gap(i)) continue;
    by_slot[segmentation.slot_of(series.time_at(i))].push_back(series.values()[i]);
  }

  if (options.space == ClusteringSpace::per_slot) {
    for (std::size_t slot = 0; slot < slots; ++slot) {
      const auto& raw = by_slot[slot];
      const PointSet points = PointSet::from_values(raw);
      DbscanParams params = options.dbscan;
      std::vector<double> survivors;
      std::size_t outliers = 0;
      bool clustered = !raw.empty();
      if (clustered && options.auto_epsilon) {
        if (raw.size() < params.min_points + 1) {
          clustered = false;
        } else {
          params.epsilon = std::max(tune_epsilon(points, params.min_points), 1e-6);
        }
      }
      if (clustered) {
        const auto assignment = dbscan(points, params);
        for (std::size_t c = 0; c < assignment.clusters.size(); ++c) {
          if (excluded(assignment.clusters[c], options)) {
            out.excluded_low_clusters.push_back({slot, static_cast<int>(c), assignment.clusters[c].mean,
                                                 assignment.clusters[c].mean >= options.low_load_floor_wh});
          }
        }
        for (std::size_t i = 0; i < raw.size(); ++i) {
          const int label = assignment.labels[i];
          if (label == kNoise) {
            ++outliers;
          } else if (!excluded(assignment.clusters[static_cast<std::size_t>(label)], options)) {
            survivors.push_back(raw[i]);
          }
        }
      }
      out.slots[slot] = summarize(std::move(survivors), raw, options.medium);
      out.slots[slot].outliers = outliers;
      out.slots[slot].epsilon_wh = params.epsilon;
      out.outlier_count += outliers;
    }
  } else {
    PointSet points(2);
    std::vector<std::size_t> slot_of_point;
    for (std::size_t slot = 0; slot < slots; ++slot) {
      for (double v : by_slot[slot]) {
        const double p[2] = {static_cast<double>(slot), v};
        points.push_back(p);
        slot_of_point.push_back(slot);
      }
    }
    DbscanParams params = options.dbscan;
    if (options.auto_epsilon) params.epsilon = std::max(tune_epsilon(points, params.min_points), 1e-6);
    const auto assignment = dbscan(points, params);
    std::vector<bool> first_seen(assignment.clusters.size(), false);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int label = assignment.labels[i];
      if (label < 0 || first_seen[static_cast<std::size_t>(label)]) continue;
      first_seen[static_cast<std::size_t>(label)] = true;
      const auto& c = assignment.clusters[static_cast<std::size_t>(label)];
      if (excluded(c, options)) {
        out.excluded_low_clusters.push_back({slot_of_point[i], label, c.mean, c.mean >= options.low_load_floor_wh});
      }
    }
    std::vector<std::vector<double>> survivors(slots);
    std::vector<std::size_t> outliers(slots, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const int label = assignment.labels[i];
      if (label == kNoise) {
        ++outliers[slot_of_point[i]];
      } else if (!excluded(assignment.clusters[static_cast<std::size_t>(label)], options)) {
        survivors[slot_of_point[i]].push_back(points[i][1]);
      }
    }
    for (std::size_t slot = 0; slot < slots; ++slot) {
      out.slots[slot] = summarize(std::move(survivors[slot]), by_slot[slot], options.medium);
      out.slots[slot].outliers = outliers[slot];
      out.slots[slot].epsilon_wh = params.epsilon;
      out.outlier_count += outliers[slot];
    }
  }

  if (out.fallback_count() == slots) {
    throw Error(ErrorCode::EmptyAfterExclusion, "every slot was excluded; check floor, ceiling and epsilon");
  }
  return out;
}

FlexibilityBand flexibility_band(const BaselineSet& baselines, FlexDirection direction, double adjustment_fraction) {
  if (!(adjustment_fraction > 0.0) || adjustment_fraction > kMaxAdjustmentFraction) {
    throw Error(ErrorCode::FractionOutOfRange, "adjustment fraction must be in (0, 0.10]");
  }
  FlexibilityBand band;
  band.direction = direction;
  band.adjustment_fraction = adjustment_fraction;
  band.available_flex_wh.reserve(baselines.slots.size());
  for (const auto& s : baselines.slots) {
    const double adjustment = adjustment_fraction * (s.max_wh - s.medium_wh);
    const double base = direction == FlexDirection::downward ? s.medium_wh - s.min_wh : s.max_wh - s.medium_wh;
    band.available_flex_wh.push_back(std::clamp(base + adjustment, 0.0, s.max_wh - s.min_wh));
  }
  return band;
}

std::string format_baseline_csv(const BaselineSet& baselines) {
  std::string out = "slot,min_wh,medium_wh,max_wh,fallback\n";
  for (std::size_t i = 0; i < baselines.slots.size(); ++i) {
    const auto& s = baselines.slots[i];
    out += std::to_string(i) + ',' + format_number(s.min_wh) + ',' + format_number(s.medium_wh) + ',' +
           format_number(s.max_wh) + ',' + (s.fallback ? "true" : "false") + '\n';
  }
  return out;
}

std::string format_band_csv(const FlexibilityBand& band) {
  std::string out = "slot,direction,available_flex_wh\n";
  const std::string dir(to_string(band.direction));
  for (std::size_t i = 0; i < band.available_flex_wh.size(); ++i) {
    out += std::to_string(i) + ',' + dir + ',' + format_number(band.available_flex_wh[i]) + '\n';
  }
  return out;
}

}  // namespace flexkit
