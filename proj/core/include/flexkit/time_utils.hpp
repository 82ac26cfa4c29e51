#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace flexkit {

/// Seconds since 1970-01-01T00:00:00Z. Every stored timestamp uses this.
using EpochSeconds = std::int64_t;

/// Floor division that rounds toward negative infinity.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept {
  return a - floor_div(a, b) * b;
}

/// Parses `YYYY-MM-DDTHH:MM:SS[.000]Z` or with a `+HH:MM`/`-HH:MM` offset.
/// Fractional seconds are accepted only when they are all zeros.
std::optional<EpochSeconds> parse_rfc3339(std::string_view text);

/// Always emits `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_rfc3339(EpochSeconds t);

struct YearMonth {
  int year = 1970;
  unsigned month = 1;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  static std::optional<YearMonth> parse(std::string_view text);  // "YYYY-MM"
  static YearMonth of(EpochSeconds t);

  std::string to_string() const;
  EpochSeconds begin() const;  // first second of the month
  EpochSeconds end() const;    // first second of the following month
  YearMonth next() const;
};

/// Day of week with Monday = 0.
int weekday_monday0(EpochSeconds t);

}  // namespace flexkit
