#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace footrank {

/// Splits one CSV record. Handles double-quoted fields with embedded commas
/// and doubled quotes; embedded newlines are not supported (none of the file
/// formats here produce them).
std::vector<std::string> split_csv_line(std::string_view line);

/// Quotes a field if it contains a comma, quote, or leading/trailing space.
std::string csv_escape(std::string_view field);

/// Shortest decimal form that parses back to exactly the same double.
std::string format_double(double v);

double parse_double(std::string_view s);
int parse_int(std::string_view s);

}  // namespace footrank
