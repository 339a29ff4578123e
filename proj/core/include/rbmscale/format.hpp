#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace rbmscale {

// Shortest round-trip-safe decimal: 17 significant digits.
std::string format_real(double x);

// Parses a real written by format_real (also accepts "nan", "inf").
double parse_real(std::string_view text);

std::vector<std::string> split_fields(std::string_view line, char sep);

std::string trim(std::string_view text);

}  // namespace rbmscale
