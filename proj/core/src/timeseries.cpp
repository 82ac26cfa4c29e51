#include "flexkit/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "flexkit/error.hpp"

namespace flexkit {

std::string_view to_string(EnergyUnit unit) noexcept {
  switch (unit) {
    case EnergyUnit::Wh: return "Wh";
    case EnergyUnit::kWh: return "kWh";
    case EnergyUnit::W: return "W";
    case EnergyUnit::kW: return "kW";
  }
  return "Wh";
}

std::optional<EnergyUnit> parse_energy_unit(std::string_view text) noexcept {
  if (text == "Wh") return EnergyUnit::Wh;
  if (text == "kWh") return EnergyUnit::kWh;
  if (text == "W") return EnergyUnit::W;
  if (text == "kW") return EnergyUnit::kW;
  return std::nullopt;
}

double to_wh(double value, EnergyUnit unit, std::int64_t interval_s) noexcept {
  const double hours = static_cast<double>(interval_s) / 3600.0;
  switch (unit) {
    case EnergyUnit::Wh: return value;
    case EnergyUnit::kWh: return value * 1000.0;
    case EnergyUnit::W: return value * hours;
    case EnergyUnit::kW: return value * 1000.0 * hours;
  }
  return value;
}

MeterSeries::MeterSeries(EpochSeconds start_time, std::int64_t sampling_interval_s,
                         std::vector<double> values_wh, std::vector<IndexRange> gaps)
    : start_(start_time),
      interval_s_(sampling_interval_s),
      values_(std::move(values_wh)),
      gaps_(std::move(gaps)) {
  if (interval_s_ <= 0) {
    throw Error(ErrorCode::InvalidParameters, "sampling interval must be positive");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::InvalidReading, "non-finite value at index " + std::to_string(i));
    }
    if (values_[i] < 0.0) {
      throw Error(ErrorCode::NegativeReading, "negative value at index " + std::to_string(i));
    }
  }
  std::size_t next_free = 0;
  for (const auto& g : gaps_) {
    if (g.first > g.last || g.last >= values_.size() || g.first < next_free) {
      throw Error(ErrorCode::InvalidParameters, "gap ranges must be sorted, disjoint and in range");
    }
    next_free = g.last + 1;
    for (std::size_t i = g.first; i <= g.last; ++i) values_[i] = 0.0;
  }
}

bool MeterSeries::is_gap(std::size_t index) const noexcept {
  auto it = std::upper_bound(gaps_.begin(), gaps_.end(), index,
                             [](std::size_t i, const IndexRange& g) { return i < g.first; });
  if (it == gaps_.begin()) return false;
  --it;
  return index >= it->first && index <= it->last;
}

std::size_t MeterSeries::gap_count() const noexcept {
  std::size_t n = 0;
  for (const auto& g : gaps_) n += g.length();
  return n;
}

MeterSeries MeterSeries::slice(std::size_t first, std::size_t count) const {
  if (first > values_.size() || count > values_.size() - first) {
    throw Error(ErrorCode::InvalidParameters, "slice out of range");
  }
  std::vector<double> v(values_.begin() + static_cast<std::ptrdiff_t>(first),
                        values_.begin() + static_cast<std::ptrdiff_t>(first + count));
  std::vector<IndexRange> g;
  if (count > 0) {
    const std::size_t last = first + count - 1;
    for (const auto& r : gaps_) {
      if (r.last < first || r.first > last) continue;
      g.push_back({std::max(r.first, first) - first, std::min(r.last, last) - first});
    }
  }
  return MeterSeries(time_at(first), interval_s_, std::move(v), std::move(g));
}

namespace {

std::vector<IndexRange> ranges_from_mask(const std::vector<bool>& missing) {
  std::vector<IndexRange> out;
  for (std::size_t i = 0; i < missing.size();) {
    if (!missing[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j + 1 < missing.size() && missing[j + 1]) ++j;
    out.push_back({i, j});
    i = j + 1;
  }
  return out;
}

}  // namespace

MeterSeries validate_series(std::span<const Reading> raw, const ValidationOptions& options,
                            ValidationReport* report) {
  if (raw.empty()) throw Error(ErrorCode::EmptyInput, "no readings");

  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!std::isfinite(raw[i].value)) {
      throw Error(ErrorCode::InvalidReading, "non-finite reading at row " + std::to_string(i));
    }
    if (raw[i].value < 0.0) {
      throw Error(ErrorCode::NegativeReading, "negative reading at row " + std::to_string(i));
    }
    if (i > 0 && raw[i].timestamp <= raw[i - 1].timestamp) {
      throw Error(ErrorCode::NonMonotonicTimestamps,
                  "timestamps must be strictly increasing (row " + std::to_string(i) + ")");
    }
  }

  std::int64_t interval = 0;
  if (raw.size() < 2) {
    if (!options.interval_hint_s || *options.interval_hint_s <= 0) {
      throw Error(ErrorCode::NonUniformGrid, "a single reading needs an interval hint");
    }
    interval = *options.interval_hint_s;
  } else {
    std::map<std::int64_t, std::size_t> counts;
    for (std::size_t i = 1; i < raw.size(); ++i) ++counts[raw[i].timestamp - raw[i - 1].timestamp];
    std::size_t best = 0;
    for (const auto& [delta, n] : counts) {
      if (n > best) {  // map order: smallest delta wins ties
        best = n;
        interval = delta;
      }
    }
    const double share = static_cast<double>(best) / static_cast<double>(raw.size() - 1);
    if (share < options.uniformity_threshold) {
      throw Error(ErrorCode::NonUniformGrid,
                  "modal interval " + std::to_string(interval) + " s explains only " +
                      std::to_string(share * 100.0) + "% of deltas");
    }
  }

  const EpochSeconds start = raw.front().timestamp;
  std::size_t dropped = 0;
  std::vector<std::pair<std::size_t, double>> on_grid;
  on_grid.reserve(raw.size());
  for (const auto& r : raw) {
    const std::int64_t offset = r.timestamp - start;
    if (offset % interval != 0) {
      ++dropped;
      continue;
    }
    on_grid.emplace_back(static_cast<std::size_t>(offset / interval), to_wh(r.value, r.unit, interval));
  }
  const std::size_t n = on_grid.back().first + 1;
  std::vector<double> values(n, 0.0);
  std::vector<bool> missing(n, true);
  for (const auto& [idx, v] : on_grid) {
    values[idx] = v;
    missing[idx] = false;
  }
  auto gaps = ranges_from_mask(missing);
  if (report) {
    report->off_grid_dropped = dropped;
    report->missing_points = static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
  }
  return MeterSeries(start, interval, std::move(values), std::move(gaps));
}

std::vector<Reading> to_readings(const MeterSeries& series) {
  std::vector<Reading> out;
  out.reserve(series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series.is_gap(i)) continue;
    out.push_back({series.time_at(i), series.values()[i], EnergyUnit::Wh});
  }
  return out;
}

MeterSeries resample(const MeterSeries& series, std::int64_t target_interval_s, ResampleMode mode) {
  const std::int64_t src = series.sampling_interval_s();
  if (target_interval_s < src) {
    throw Error(ErrorCode::UpsampleRequested, "target interval is finer than the source interval");
  }
  if (target_interval_s % src != 0) {
    throw Error(ErrorCode::IncompatibleIntervals, "target interval must be a multiple of the source interval");
  }
  const auto factor = static_cast<std::size_t>(target_interval_s / src);
  const std::size_t windows = series.size() / factor;
  const auto values = series.values();

  std::vector<double> out(windows, 0.0);
  std::vector<bool> missing(windows, false);
  for (std::size_t w = 0; w < windows; ++w) {
    double acc = 0.0;
    for (std::size_t k = 0; k < factor; ++k) {
      const std::size_t i = w * factor + k;
      if (series.is_gap(i)) {
        missing[w] = true;
        break;
      }
      acc += values[i];
    }
    if (missing[w]) continue;
    switch (mode) {
      case ResampleMode::sum: out[w] = acc; break;
      case ResampleMode::mean: out[w] = acc / static_cast<double>(factor); break;
      case ResampleMode::last: out[w] = values[w * factor + factor - 1]; break;
    }
  }
  return MeterSeries(series.start_time(), target_interval_s, std::move(out), ranges_from_mask(missing));
}

MeterSeries fill_gaps(const MeterSeries& series, GapPolicy policy) {
  if (!series.has_gaps()) return series;
  if (series.gap_count() == series.size()) throw Error(ErrorCode::AllGaps, "series has no valid points");

  if (policy == GapPolicy::drop_segment) {
    std::size_t best_first = 0, best_len = 0, cursor = 0;
    auto consider = [&](std::size_t first, std::size_t end) {
      if (end > first && end - first > best_len) {
        best_first = first;
        best_len = end - first;
      }
    };
    for (const auto& g : series.gaps()) {
      consider(cursor, g.first);
      cursor = g.last + 1;
    }
    consider(cursor, series.size());
    return series.slice(best_first, best_len);
  }

  const auto& gaps = series.gaps();
  const std::size_t first_valid = gaps.front().first == 0 ? gaps.front().last + 1 : 0;
  const std::size_t last_valid = gaps.back().last == series.size() - 1 ? gaps.back().first - 1 : series.size() - 1;
  std::vector<double> v(series.values().begin(), series.values().end());
  for (const auto& g : gaps) {
    if (g.first <= first_valid || g.last >= last_valid) continue;  // leading/trailing
    const double left = v[g.first - 1];
    const double right = v[g.last + 1];
    const double span = static_cast<double>(g.last - g.first + 2);
    for (std::size_t i = g.first; i <= g.last; ++i) {
      const double frac = static_cast<double>(i - g.first + 1) / span;
      v[i] = left + (right - left) * frac;
    }
  }
  std::vector<double> trimmed(v.begin() + static_cast<std::ptrdiff_t>(first_valid),
                              v.begin() + static_cast<std::ptrdiff_t>(last_valid + 1));
  return MeterSeries(series.time_at(first_valid), series.sampling_interval_s(), std::move(trimmed));
}

NormalizationSpec::NormalizationSpec(NormalizationMethod method, std::vector<FeatureScale> params)
    : method_(method), params_(std::move(params)) {
  for (const auto& p : params_) {
    if (!(p.scale != 0.0) || !std::isfinite(p.scale) || !std::isfinite(p.offset)) {
      throw Error(ErrorCode::InvalidNormalization, "normalization scale must be finite and non-zero");
    }
  }
}

NormalizationSpec NormalizationSpec::fit(const Matrix& features, NormalizationMethod method,
                                         std::optional<std::size_t> row_count) {
  const std::size_t rows = std::min(row_count.value_or(features.rows()), features.rows());
  if (rows == 0) throw Error(ErrorCode::EmptyInput, "cannot fit normalization on zero rows");
  std::vector<FeatureScale> params(features.cols());
  for (std::size_t c = 0; c < features.cols(); ++c) {
    double offset = 0.0, scale = 1.0;
    if (method == NormalizationMethod::min_max) {
      double lo = features(0, c), hi = features(0, c);
      for (std::size_t r = 1; r < rows; ++r) {
        lo = std::min(lo, features(r, c));
        hi = std::max(hi, features(r, c));
      }
      offset = lo;
      scale = hi - lo;
    } else {
      double mean = 0.0;
      for (std::size_t r = 0; r < rows; ++r) mean += features(r, c);
      mean /= static_cast<double>(rows);
      double var = 0.0;
      for (std::size_t r = 0; r < rows; ++r) var += (features(r, c) - mean) * (features(r, c) - mean);
      offset = mean;
      scale = std::sqrt(var / static_cast<double>(rows));
    }
    if (!(scale > 0.0)) scale = 1.0;
    params[c] = {offset, scale};
  }
  return NormalizationSpec(method, std::move(params));
}

void NormalizationSpec::apply(std::span<double> row) const {
  if (row.size() != params_.size()) throw Error(ErrorCode::InvalidNormalization, "feature count mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = (row[c] - params_[c].offset) / params_[c].scale;
}

void NormalizationSpec::invert(std::span<double> row) const {
  if (row.size() != params_.size()) throw Error(ErrorCode::InvalidNormalization, "feature count mismatch");
  for (std::size_t c = 0; c < row.size(); ++c) row[c] = row[c] * params_[c].scale + params_[c].offset;
}

Matrix NormalizationSpec::apply(const Matrix& features) const {
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) apply(out.row(r));
  return out;
}

Matrix NormalizationSpec::invert(const Matrix& features) const {
  Matrix out = features;
  for (std::size_t r = 0; r < out.rows(); ++r) invert(out.row(r));
  return out;
}

std::string_view to_string(NormalizationMethod method) noexcept {
  return method == NormalizationMethod::min_max ? "min_max" : "z_score";
}

std::optional<NormalizationMethod> parse_normalization_method(std::string_view text) noexcept {
  if (text == "min_max") return NormalizationMethod::min_max;
  if (text == "z_score") return NormalizationMethod::z_score;
  return std::nullopt;
}

}  // namespace flexkit
