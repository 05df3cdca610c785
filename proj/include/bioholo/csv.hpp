#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace bioholo::csv {

struct Row {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Splits non-blank, non-`#` lines on commas and trims whitespace.
std::vector<Row> read_rows(std::istream& in);

/// Rows of exactly `columns` numeric fields. Throws ParseError naming the line.
std::vector<std::vector<double>> read_numeric(std::istream& in, std::size_t columns);

double parse_double(std::string_view text);

std::string trim(std::string_view text);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace bioholo::csv
