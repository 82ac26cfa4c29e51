#include "flexkit/csv.hpp"

#include "flexkit/number_format.hpp"

namespace flexkit {

std::vector<std::string_view> split_csv_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t comma = line.find(',', pos);
    std::string_view field = trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (field.size() >= 2 && field.front() == '"' && field.back() == '"') {
      field = field.substr(1, field.size() - 2);
    }
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

MeterCsv parse_meter_csv(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::MalformedRow, "missing header");
  const auto header = split_csv_fields(lines.front());
  if (header.size() != 3 || header[0] != "timestamp" || header[1] != "value" || header[2] != "unit") {
    throw Error(ErrorCode::MalformedRow, "expected header 'timestamp,value,unit'");
  }
  MeterCsv out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const std::size_t line_no = i + 1;
    const auto fields = split_csv_fields(lines[i]);
    if (fields.size() != 3) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "expected 3 fields"});
      continue;
    }
    auto ts = parse_rfc3339(fields[0]);
    if (!ts) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "unparseable timestamp"});
      continue;
    }
    auto value = parse_number(fields[1]);
    if (!value) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "unparseable value"});
      continue;
    }
    auto unit = parse_energy_unit(fields[2]);
    if (!unit) {
      out.errors.push_back({line_no, ErrorCode::MalformedRow, "unit must be one of Wh|kWh|W|kW"});
      continue;
    }
    if (*value < 0.0) {
      out.errors.push_back({line_no, ErrorCode::NegativeReading, "negative reading"});
      continue;
    }
    out.readings.push_back({*ts, *value, *unit});
    out.lines.push_back(line_no);
  }
  return out;
}

std::string format_meter_csv(std::span<const Reading> readings) {
  std::string out = "timestamp,value,unit\n";
  out.reserve(readings.size() * 40);
  for (const auto& r : readings) {
    out += format_rfc3339(r.timestamp);
    out += ',';
    out += format_number(r.value);
    out += ',';
    out += to_string(r.unit);
    out += '\n';
  }
  return out;
}

std::string format_meter_csv(const MeterSeries& series) {
  const auto readings = to_readings(series);
  return format_meter_csv(readings);
}

}  // namespace flexkit
