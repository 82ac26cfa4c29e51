#include "flexkit/time_utils.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace flexkit {
namespace {

using namespace std::chrono;

bool read_int(std::string_view text, std::size_t pos, std::size_t len, int& out) {
  if (pos + len > text.size()) return false;
  for (std::size_t i = pos; i < pos + len; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto res = std::from_chars(text.data() + pos, text.data() + pos + len, out);
  return res.ec == std::errc{};
}

EpochSeconds days_to_epoch(year_month_day ymd) {
  return static_cast<EpochSeconds>(sys_days{ymd}.time_since_epoch().count()) * 86400;
}

}  // namespace

std::optional<EpochSeconds> parse_rfc3339(std::string_view text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  if (text.size() < 20) return std::nullopt;
  if (!read_int(text, 0, 4, y) || text[4] != '-' || !read_int(text, 5, 2, mo) || text[7] != '-' ||
      !read_int(text, 8, 2, d) || (text[10] != 'T' && text[10] != 't' && text[10] != ' ') ||
      !read_int(text, 11, 2, h) || text[13] != ':' || !read_int(text, 14, 2, mi) ||
      text[16] != ':' || !read_int(text, 17, 2, s)) {
    return std::nullopt;
  }
  std::size_t pos = 19;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    const std::size_t digits_begin = pos;
    while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
      if (text[pos] != '0') return std::nullopt;
      ++pos;
    }
    if (pos == digits_begin) return std::nullopt;
  }
  if (pos >= text.size()) return std::nullopt;

  int offset_s = 0;
  if (text[pos] == 'Z' || text[pos] == 'z') {
    ++pos;
  } else if (text[pos] == '+' || text[pos] == '-') {
    int oh = 0, om = 0;
    if (!read_int(text, pos + 1, 2, oh) || pos + 3 >= text.size() || text[pos + 3] != ':' ||
        !read_int(text, pos + 4, 2, om) || oh > 23 || om > 59) {
      return std::nullopt;
    }
    offset_s = (oh * 3600 + om * 60) * (text[pos] == '-' ? -1 : 1);
    pos += 6;
  } else {
    return std::nullopt;
  }
  if (pos != text.size()) return std::nullopt;

  const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok() || h > 23 || mi > 59 || s > 59) return std::nullopt;
  return days_to_epoch(ymd) + h * 3600 + mi * 60 + s - offset_s;
}

std::string format_rfc3339(EpochSeconds t) {
  const std::int64_t days_since = floor_div(t, 86400);
  const std::int64_t secs = t - days_since * 86400;
  const year_month_day ymd{sys_days{days{days_since}}};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<int>(secs / 3600), static_cast<int>((secs % 3600) / 60),
                static_cast<int>(secs % 60));
  return buf;
}

std::optional<YearMonth> YearMonth::parse(std::string_view text) {
  int y = 0, m = 0;
  if (text.size() != 7 || text[4] != '-' || !read_int(text, 0, 4, y) || !read_int(text, 5, 2, m) ||
      m < 1 || m > 12) {
    return std::nullopt;
  }
  return YearMonth{y, static_cast<unsigned>(m)};
}

YearMonth YearMonth::of(EpochSeconds t) {
  const year_month_day ymd{sys_days{days{floor_div(t, 86400)}}};
  return YearMonth{static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month())};
}

std::string YearMonth::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
  return buf;
}

EpochSeconds YearMonth::begin() const {
  return days_to_epoch(year_month_day{std::chrono::year{year}, std::chrono::month{month}, day{1}});
}

EpochSeconds YearMonth::end() const { return next().begin(); }

YearMonth YearMonth::next() const {
  return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

int weekday_monday0(EpochSeconds t) {
  // 1970-01-01 was a Thursday (Monday-based index 3).
  return static_cast<int>(floor_mod(floor_div(t, 86400) + 3, 7));
}

}  // namespace flexkit
