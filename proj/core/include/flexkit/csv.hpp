#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "flexkit/error.hpp"
#include "flexkit/timeseries.hpp"

namespace flexkit {

/// One rejected CSV row. `line` is 1-based and counts the header.
struct RowError {
  std::size_t line = 0;
  ErrorCode code = ErrorCode::MalformedRow;
  std::string message;
};

/// Splits one CSV record on commas. Fields are trimmed and unquoted; the
/// formats here never embed commas inside fields.
std::vector<std::string_view> split_csv_fields(std::string_view line);

/// Iterates lines, tolerating `\r\n` and a missing final newline.
std::vector<std::string_view> split_lines(std::string_view text);

struct MeterCsv {
  std::vector<Reading> readings;
  std::vector<std::size_t> lines;  // source line of each reading
  std::vector<RowError> errors;
};

/// Parses `timestamp,value,unit`. A wrong header throws `MalformedRow`; bad
/// rows are reported and skipped.
MeterCsv parse_meter_csv(std::string_view text);

/// Emits the gap-free points of `series` in Wh.
std::string format_meter_csv(const MeterSeries& series);
std::string format_meter_csv(std::span<const Reading> readings);

}  // namespace flexkit
