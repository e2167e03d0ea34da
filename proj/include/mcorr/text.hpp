#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mcorr {

std::string_view trim(std::string_view text);

/// Splits on sep and trims each field; an empty input gives no fields.
std::vector<std::string> split_list(std::string_view text, char sep = ',');

/// Whole-string numeric parsing; failures throw ParseError naming `what`.
std::int64_t parse_int(std::string_view text, std::string_view what);
std::uint64_t parse_uint(std::string_view text, std::string_view what);
double parse_double(std::string_view text, std::string_view what);
std::vector<std::int64_t> parse_int_list(std::string_view text, std::string_view what);

/// printf("%.17g"); the single float format of every report.
std::string format_double(double x);

} // namespace mcorr
