#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flexkit/time_utils.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

/// Full complex DFT `X_k = sum_n x_n exp(-2 pi i k n / N)` for any N >= 1.
/// Power-of-two sizes use an iterative radix-2 FFT; other sizes go through
/// Bluestein's chirp-z convolution.
std::vector<std::complex<double>> fft(std::span<const std::complex<double>> input);

enum class Detrend { none, remove_mean };

struct SpectralBin {
  double frequency_hz = 0.0;
  std::complex<double> amplitude;

  double magnitude() const { return std::abs(amplitude); }
};

/// One-sided spectrum: bins k = 0..floor(n/2) at frequency k * Fs / n.
struct Spectrum {
  double sampling_frequency_hz = 0.0;
  std::size_t n_samples = 0;
  std::vector<SpectralBin> bins;

  /// Signal energy sum |x_n|^2 reconstructed from the one-sided bins.
  double parseval_energy() const;
};

Spectrum dft(std::span<const double> samples, double sampling_frequency_hz, Detrend detrend);

/// Throws `GappySeries` if the series has gaps and `TooShort` below 4 samples.
Spectrum dft(const MeterSeries& series, Detrend detrend = Detrend::remove_mean);

struct SpectralPeak {
  double frequency_hz = 0.0;
  double period_s = 0.0;
  double magnitude = 0.0;
  std::size_t magnitude_rank = 0;  // 1-based
  double relative_power = 0.0;     // magnitude^2 / total non-DC power
};

inline constexpr double kDefaultMinRelativePower = 0.05;

/// Strict local maxima of the non-DC magnitude spectrum whose relative power
/// reaches `min_relative_power`, strongest first, at most `max_peaks`.
/// Throws `NoPeaks` when nothing qualifies.
std::vector<SpectralPeak> dominant_periods(const Spectrum& spectrum, std::size_t max_peaks,
                                           double min_relative_power = kDefaultMinRelativePower);

/// Maps timestamps onto the slots of a detected cycle.
///
/// Slots are counted from `anchor`, which defaults to Monday 1970-01-05
/// 00:00 UTC, so a 24 h cycle yields hour-of-day slots and a 168 h cycle
/// yields hour-of-week slots starting Monday midnight.
struct SegmentationRule {
  static constexpr EpochSeconds kMondayAnchor = 4 * 86400;

  std::int64_t sampling_interval_s = 3600;
  std::size_t slots_per_cycle = 24;
  EpochSeconds anchor = kMondayAnchor;

  std::int64_t period_s() const noexcept {
    return sampling_interval_s * static_cast<std::int64_t>(slots_per_cycle);
  }
  std::size_t slot_of(EpochSeconds t) const noexcept {
    const std::int64_t step = floor_div(t - anchor, sampling_interval_s);
    return static_cast<std::size_t>(floor_mod(step, static_cast<std::int64_t>(slots_per_cycle)));
  }
};

/// Throws `PeriodBelowResolution` when the period spans fewer than two samples.
SegmentationRule period_to_segmentation(const SpectralPeak& peak, std::int64_t sampling_interval_s);
SegmentationRule segmentation_for_period(double period_s, std::int64_t sampling_interval_s);

/// Calendar-month pieces of a series, in order. Months only partially
/// covered by the series are included as-is.
std::vector<std::pair<YearMonth, MeterSeries>> split_by_month(const MeterSeries& series);

struct SpectralOptions {
  std::size_t max_peaks = 5;
  double min_relative_power = kDefaultMinRelativePower;
  Detrend detrend = Detrend::remove_mean;
  double max_gap_fraction = 0.20;
  bool whole_history = false;
};

struct PeriodAnalysis {
  YearMonth month;  // first month covered when whole_history is set
  Spectrum spectrum;
  std::vector<SpectralPeak> peaks;
};

struct SkippedMonth {
  YearMonth month;
  double gap_fraction = 0.0;
  std::string reason;
};

struct SpectralReport {
  std::vector<PeriodAnalysis> periods;
  std::vector<SkippedMonth> skipped;
};

/// Per-month transform and peak picking. Months whose gap share exceeds
/// `max_gap_fraction` are skipped; the rest are gap-filled by linear
/// interpolation first.
SpectralReport analyze_periodicity(const MeterSeries& series, const SpectralOptions& options = {});

/// CSV `frequency_hz,period_s,magnitude,relative_power`, one row per peak.
std::string format_peaks_csv(std::span<const SpectralPeak> peaks);
/// Same columns, one row per non-DC bin.
std::string format_spectrum_csv(const Spectrum& spectrum);

/// Standalone SVG of the magnitude spectrum; peaks are labelled with their period.
std::string spectrum_svg(const Spectrum& spectrum, std::span<const SpectralPeak> peaks);

}  // namespace flexkit
