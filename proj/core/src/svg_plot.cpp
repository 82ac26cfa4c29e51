#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "flexkit/spectral.hpp"

namespace flexkit {

std::string spectrum_svg(const Spectrum& spectrum, std::span<const SpectralPeak> peaks) {
  constexpr double width = 800, height = 360, left = 60, right = 20, top = 20, bottom = 50;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;

  double max_mag = 0.0;
  for (std::size_t k = 1; k < spectrum.bins.size(); ++k) max_mag = std::max(max_mag, spectrum.bins[k].magnitude());
  if (max_mag <= 0.0) max_mag = 1.0;
  const double f_max = spectrum.sampling_frequency_hz / 2.0;

  auto x_of = [&](double f) { return left + plot_w * (f / f_max); };
  auto y_of = [&](double m) { return top + plot_h * (1.0 - m / max_mag); };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" viewBox=\"0 0 %.0f %.0f\">\n",
                width, height, width, height);
  svg += buf;
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n"
                "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                left, top + plot_h, left + plot_w, top + plot_h, left, top, left, top + plot_h);
  svg += buf;

  svg += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
  for (std::size_t k = 1; k < spectrum.bins.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(spectrum.bins[k].frequency_hz),
                  y_of(spectrum.bins[k].magnitude()));
    svg += buf;
  }
  svg += "\"/>\n";

  for (const auto& p : peaks) {
    const double hours = p.period_s / 3600.0;
    std::snprintf(buf, sizeof buf,
                  "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"crimson\"/>\n"
                  "<text x=\"%.2f\" y=\"%.2f\" font-size=\"11\" fill=\"crimson\">#%zu %.4g h</text>\n",
                  x_of(p.frequency_hz), y_of(p.magnitude), x_of(p.frequency_hz) + 6, y_of(p.magnitude) + 4,
                  p.magnitude_rank, hours);
    svg += buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\">frequency (0 .. %.4g Hz)</text>\n"
                "<text x=\"12\" y=\"%.1f\" font-size=\"12\" transform=\"rotate(-90 12 %.1f)\">|X(f)|</text>\n",
                left + plot_w / 2 - 60, height - 15, f_max, top + plot_h / 2, top + plot_h / 2);
  svg += buf;
  svg += "</svg>\n";
  return svg;
}

}  // namespace flexkit
