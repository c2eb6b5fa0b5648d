#include "ecd/csv.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "ecd/error.hpp"

namespace ecd::csv {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

}  // namespace

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void for_each_row(std::istream& in,
                  const std::function<void(long, const std::vector<std::string>&)>& fn) {
  std::string line;
  long number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    fn(number, split(t));
  }
}

double parse_double(const std::string& field, long line, std::string_view column) {
  double v = 0.0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v))
    throw LoadError("column '" + std::string(column) + "': '" + field + "' is not a finite number",
                    line);
  return v;
}

long long parse_int(const std::string& field, long line, std::string_view column) {
  long long v = 0;
  const char* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw LoadError("column '" + std::string(column) + "': '" + field + "' is not an integer",
                    line);
  return v;
}

std::string num(double v) { return fmt::format("{}", v); }

void write_header_comment(std::ostream& out, std::string_view header) {
  std::size_t start = 0;
  while (start < header.size()) {
    auto pos = header.find('\n', start);
    if (pos == std::string_view::npos) pos = header.size();
    out << "# " << header.substr(start, pos - start) << '\n';
    start = pos + 1;
  }
}

}  // namespace ecd::csv
