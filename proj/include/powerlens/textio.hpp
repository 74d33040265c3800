#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace powerlens {

/// Shortest decimal form that round-trips the exact double value.
std::string format_double(double value);

/// Strict parsers: the whole field must be consumed. Throws ParseError.
double parse_double(std::string_view field, const std::string& context);
std::int64_t parse_int(std::string_view field, const std::string& context);

std::vector<std::string_view> split(std::string_view line, char delim);
std::string_view trim(std::string_view text) noexcept;

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace powerlens
