#include <cmath>

#include "flexkit/hvac.hpp"
#include "flexkit/number_format.hpp"

namespace flexkit {

HvacCsv parse_hvac_csv(std::string_view text, double standby_w) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::MalformedRow, "missing header");
  const auto header = split_csv_fields(lines.front());
  static constexpr std::string_view kColumns[] = {"timestamp", "indoor_c", "outdoor_c", "power_w", "state", "set_temp_c"};
  bool header_ok = header.size() == std::size(kColumns);
  for (std::size_t i = 0; header_ok && i < header.size(); ++i) header_ok = header[i] == kColumns[i];
  if (!header_ok) {
    throw Error(ErrorCode::MalformedRow, "expected header 'timestamp,indoor_c,outdoor_c,power_w,state,set_temp_c'");
  }

  HvacCsv out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    const auto f = split_csv_fields(lines[i]);
    if (f.size() != std::size(kColumns)) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "expected 6 fields"});
      continue;
    }
    const auto ts = parse_rfc3339(f[0]);
    const auto indoor = parse_number(f[1]);
    const auto outdoor = parse_number(f[2]);
    const auto power = parse_number(f[3]);
    const auto state = parse_number(f[4]);
    const auto set = parse_number(f[5]);
    if (!ts || !indoor || !outdoor || !power || !state || !set || (*state != 0.0 && *state != 1.0)) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "unparseable field"});
      continue;
    }
    HvacSample s{*ts, *indoor, *outdoor, *power, static_cast<int>(*state), *set};
    try {
      validate_sample(s, standby_w);
    } catch (const Error& e) {
      out.errors.push_back({line_no, e.code(), e.what()});
      continue;
    }
    out.samples.push_back(s);
    out.lines.push_back(line_no);
  }
  return out;
}

std::string format_hvac_csv(std::span<const HvacSample> samples) {
  std::string out = "timestamp,indoor_c,outdoor_c,power_w,state,set_temp_c\n";
  out.reserve(samples.size() * 64);
  for (const auto& s : samples) {
    out += format_rfc3339(s.timestamp);
    out += ',';
    out += format_number(s.indoor_temp_c);
    out += ',';
    out += format_number(s.outdoor_temp_c);
    out += ',';
    out += format_number(s.hvac_power_w);
    out += ',';
    out += s.hvac_state == 1 ? '1' : '0';
    out += ',';
    out += format_number(s.set_temp_c);
    out += '\n';
  }
  return out;
}

}  // namespace flexkit
