#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace ecd::csv {

// Splits one line on commas. Fields are trimmed of surrounding blanks and a
// trailing '\r'; quoting is not supported.
std::vector<std::string> split(std::string_view line);

// Calls fn(line_number, fields) for every non-blank line that is not a
// '#' comment. Line numbers are 1-based and count every physical line.
void for_each_row(std::istream& in,
                  const std::function<void(long, const std::vector<std::string>&)>& fn);

double parse_double(const std::string& field, long line, std::string_view column);
long long parse_int(const std::string& field, long line, std::string_view column);

// Shortest round-trip representation.
std::string num(double v);

// Writes "# <line>" for every line of `header` (nothing when empty).
void write_header_comment(std::ostream& out, std::string_view header);

}  // namespace ecd::csv
