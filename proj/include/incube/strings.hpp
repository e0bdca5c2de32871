#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace incube {

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Strict base-10 integer; also accepts an integral decimal such as "5.0".
std::optional<std::int64_t> parse_int(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
std::string to_lower(std::string_view s);

// Quotes a cell for delimited output when it contains the delimiter, a quote
// or a line break. Embedded quotes are doubled.
std::string quote_cell(std::string_view cell, char delimiter);
std::string format_row(const std::vector<std::string>& cells, char delimiter);

}  // namespace incube
