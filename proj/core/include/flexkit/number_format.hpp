#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace flexkit {

/// Shortest decimal text that parses back to exactly `value`.
/// Output is locale independent, so CSV exports are byte-stable.
std::string format_number(double value);

/// Strict decimal parse of the whole field (surrounding blanks allowed).
std::optional<double> parse_number(std::string_view text);

std::string_view trim(std::string_view text) noexcept;

}  // namespace flexkit
