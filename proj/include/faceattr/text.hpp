#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace faceattr {

/// Splits on runs of spaces/tabs; drops a trailing '\r'.
std::vector<std::string_view> split_whitespace(std::string_view line);

std::string_view trim(std::string_view text);

std::string to_lower(std::string_view text);

/// Strict full-token numeric parses; nullopt-free, throw std::invalid_argument.
long long parse_integer(std::string_view token);
double parse_real(std::string_view token);

/// Fixed-point formatting with `digits` decimals, locale independent.
std::string format_fixed(double value, int digits);

} // namespace faceattr
