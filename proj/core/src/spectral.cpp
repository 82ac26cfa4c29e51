#include "flexkit/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flexkit/error.hpp"
#include "flexkit/number_format.hpp"

namespace flexkit {
namespace {

using cd = std::complex<double>;

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// In place; `inverse` flips the twiddle sign without scaling.
void radix2(std::vector<cd>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    std::vector<cd> tw(half);
    for (std::size_t k = 0; k < half; ++k) {
      tw[k] = std::polar(1.0, sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len));
    }
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const cd u = a[i + k];
        const cd v = a[i + k + half] * tw[k];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
}

std::vector<cd> bluestein(std::span<const cd> x) {
  const std::size_t n = x.size();
  const std::size_t m = next_power_of_two(2 * n - 1);
  // chirp[k] = exp(-i pi k^2 / n); k^2 is reduced mod 2n to keep the angle small.
  std::vector<cd> chirp(n);
  const std::uint64_t two_n = 2 * static_cast<std::uint64_t>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::uint64_t kk = (static_cast<std::uint64_t>(k) * k) % two_n;
    chirp[k] = std::polar(1.0, -std::numbers::pi * static_cast<double>(kk) / static_cast<double>(n));
  }
  std::vector<cd> a(m, cd{}), b(m, cd{});
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * chirp[k];
  b[0] = std::conj(chirp[0]);
  for (std::size_t k = 1; k < n; ++k) {
    b[k] = std::conj(chirp[k]);
    b[m - k] = std::conj(chirp[k]);
  }
  radix2(a, false);
  radix2(b, false);
  for (std::size_t i = 0; i < m; ++i) a[i] *= b[i];
  radix2(a, true);
  std::vector<cd> out(n);
  const double scale = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) out[k] = a[k] * scale * chirp[k];
  return out;
}

}  // namespace

std::vector<std::complex<double>> fft(std::span<const std::complex<double>> input) {
  if (input.empty()) return {};
  if (is_power_of_two(input.size())) {
    std::vector<cd> a(input.begin(), input.end());
    radix2(a, false);
    return a;
  }
  return bluestein(input);
}

double Spectrum::parseval_energy() const {
  if (n_samples == 0 || bins.empty()) return 0.0;
  double acc = std::norm(bins.front().amplitude);
  for (std::size_t k = 1; k < bins.size(); ++k) {
    const bool nyquist = (n_samples % 2 == 0) && k == n_samples / 2;
    acc += (nyquist ? 1.0 : 2.0) * std::norm(bins[k].amplitude);
  }
  return acc / static_cast<double>(n_samples);
}

Spectrum dft(std::span<const double> samples, double sampling_frequency_hz, Detrend detrend) {
  if (samples.size() < 4) throw Error(ErrorCode::TooShort, "need at least 4 samples");
  const std::size_t n = samples.size();
  double mean = 0.0;
  if (detrend == Detrend::remove_mean) {
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
  }
  std::vector<cd> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = cd{samples[i] - mean, 0.0};
  const auto full = fft(x);

  Spectrum s;
  s.sampling_frequency_hz = sampling_frequency_hz;
  s.n_samples = n;
  s.bins.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    s.bins[k] = {static_cast<double>(k) * sampling_frequency_hz / static_cast<double>(n), full[k]};
  }
  return s;
}

Spectrum dft(const MeterSeries& series, Detrend detrend) {
  if (series.has_gaps()) throw Error(ErrorCode::GappySeries, "fill or drop gaps before the transform");
  return dft(series.values(), series.sampling_frequency_hz(), detrend);
}

std::vector<SpectralPeak> dominant_periods(const Spectrum& spectrum, std::size_t max_peaks,
                                           double min_relative_power) {
  if (max_peaks == 0) throw Error(ErrorCode::InvalidParameters, "max_peaks must be at least 1");
  const auto& bins = spectrum.bins;
  double total = 0.0;
  for (std::size_t k = 1; k < bins.size(); ++k) total += std::norm(bins[k].amplitude);
  if (!(total > 0.0)) throw Error(ErrorCode::NoPeaks, "no non-DC power");

  std::vector<SpectralPeak> peaks;
  for (std::size_t k = 1; k < bins.size(); ++k) {
    const double mag = bins[k].magnitude();
    const bool above_left = k == 1 || mag > bins[k - 1].magnitude();
    const bool above_right = k + 1 == bins.size() || mag > bins[k + 1].magnitude();
    if (!above_left || !above_right) continue;
    const double rel = mag * mag / total;
    if (rel < min_relative_power) continue;
    peaks.push_back({bins[k].frequency_hz, 1.0 / bins[k].frequency_hz, mag, 0, rel});
  }
  if (peaks.empty()) throw Error(ErrorCode::NoPeaks, "no periodic component above the power floor");
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const SpectralPeak& a, const SpectralPeak& b) { return a.magnitude > b.magnitude; });
  if (peaks.size() > max_peaks) peaks.resize(max_peaks);
  for (std::size_t i = 0; i < peaks.size(); ++i) peaks[i].magnitude_rank = i + 1;
  return peaks;
}

SegmentationRule segmentation_for_period(double period_s, std::int64_t sampling_interval_s) {
  if (sampling_interval_s <= 0 || !std::isfinite(period_s)) {
    throw Error(ErrorCode::InvalidParameters, "invalid period or interval");
  }
  if (period_s < 2.0 * static_cast<double>(sampling_interval_s)) {
    throw Error(ErrorCode::PeriodBelowResolution, "period shorter than two samples");
  }
  SegmentationRule rule;
  rule.sampling_interval_s = sampling_interval_s;
  rule.slots_per_cycle = static_cast<std::size_t>(std::llround(period_s / static_cast<double>(sampling_interval_s)));
  return rule;
}

SegmentationRule period_to_segmentation(const SpectralPeak& peak, std::int64_t sampling_interval_s) {
  return segmentation_for_period(peak.period_s, sampling_interval_s);
}

std::vector<std::pair<YearMonth, MeterSeries>> split_by_month(const MeterSeries& series) {
  std::vector<std::pair<YearMonth, MeterSeries>> out;
  std::size_t i = 0;
  while (i < series.size()) {
    const YearMonth ym = YearMonth::of(series.time_at(i));
    const EpochSeconds end = ym.end();
    std::size_t j = i;
    while (j < series.size() && series.time_at(j) < end) ++j;
    out.emplace_back(ym, series.slice(i, j - i));
    i = j;
  }
  return out;
}

namespace {

PeriodAnalysis analyze_piece(const YearMonth& ym, const MeterSeries& piece, const SpectralOptions& options) {
  const MeterSeries clean = piece.has_gaps() ? fill_gaps(piece, GapPolicy::linear_interp) : piece;
  PeriodAnalysis a;
  a.month = ym;
  a.spectrum = dft(clean, options.detrend);
  a.peaks = dominant_periods(a.spectrum, options.max_peaks, options.min_relative_power);
  return a;
}

}  // namespace

SpectralReport analyze_periodicity(const MeterSeries& series, const SpectralOptions& options) {
  SpectralReport report;
  if (series.empty()) throw Error(ErrorCode::EmptyInput, "empty series");
  std::vector<std::pair<YearMonth, MeterSeries>> pieces;
  if (options.whole_history) {
    pieces.emplace_back(YearMonth::of(series.start_time()), series);
  } else {
    pieces = split_by_month(series);
  }
  for (const auto& [ym, piece] : pieces) {
    const double gap_fraction = static_cast<double>(piece.gap_count()) / static_cast<double>(piece.size());
    if (gap_fraction > options.max_gap_fraction) {
      report.skipped.push_back({ym, gap_fraction, "gap share above limit"});
      continue;
    }
    try {
      report.periods.push_back(analyze_piece(ym, piece, options));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooShort && e.code() != ErrorCode::NoPeaks) throw;
      report.skipped.push_back({ym, gap_fraction, std::string(to_string(e.code()))});
    }
  }
  return report;
}

std::string format_peaks_csv(std::span<const SpectralPeak> peaks) {
  std::string out = "frequency_hz,period_s,magnitude,relative_power\n";
  for (const auto& p : peaks) {
    out += format_number(p.frequency_hz) + ',' + format_number(p.period_s) + ',' +
           format_number(p.magnitude) + ',' + format_number(p.relative_power) + '\n';
  }
  return out;
}

std::string format_spectrum_csv(const Spectrum& spectrum) {
  double total = 0.0;
  for (std::size_t k = 1; k < spectrum.bins.size(); ++k) total += std::norm(spectrum.bins[k].amplitude);
  std::string out = "frequency_hz,period_s,magnitude,relative_power\n";
  for (std::size_t k = 1; k < spectrum.bins.size(); ++k) {
    const auto& b = spectrum.bins[k];
    const double rel = total > 0.0 ? std::norm(b.amplitude) / total : 0.0;
    out += format_number(b.frequency_hz) + ',' + format_number(1.0 / b.frequency_hz) + ',' +
           format_number(b.magnitude()) + ',' + format_number(rel) + '\n';
  }
  return out;
}

}  // namespace flexkit
