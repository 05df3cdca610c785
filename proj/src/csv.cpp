#include "bioholo/csv.hpp"

#include <charconv>
#include <istream>

#include "bioholo/error.hpp"

namespace bioholo::csv {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_double(std::string_view text) {
  const std::string t = trim(text);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::ParseError, "not a number: '" + t + "'");
  }
  return value;
}

std::vector<Row> read_rows(std::istream& in) {
  std::vector<Row> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    rows.push_back({number, split(t, ',')});
  }
  return rows;
}

std::vector<std::vector<double>> read_numeric(std::istream& in, std::size_t columns) {
  std::vector<std::vector<double>> out;
  for (const auto& row : read_rows(in)) {
    if (row.fields.size() != columns) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(row.line) + ": expected " +
                                             std::to_string(columns) + " fields, got " +
                                             std::to_string(row.fields.size()));
    }
    std::vector<double> values;
    values.reserve(columns);
    for (const auto& f : row.fields) {
      try {
        values.push_back(parse_double(f));
      } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(row.line) + ": " + e.what());
      }
    }
    out.push_back(std::move(values));
  }
  return out;
}

}  // namespace bioholo::csv
