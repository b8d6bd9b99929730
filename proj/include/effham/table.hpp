#pragma once

// CSV result tables: '#'-prefixed metadata lines, one header row, then
// numeric rows printed with 17 significant digits so that reading a file
// back reproduces every value bit for bit.

#include <string>
#include <utility>
#include <vector>

namespace effham {

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  /// Written as "# key: value" in insertion order.
  std::vector<std::pair<std::string, std::string>> metadata;

  /// Throws unless `row` matches the header arity.
  void add_row(std::vector<double> row);
  void add_meta(std::string key, std::string value);
};

/// %.17g, with nan / inf / -inf spelled out.
std::string format_number(double v);

std::string format_table(const ResultTable& table);
/// Throws Error("cli-io", ...) on I/O failure.
void write_table(const ResultTable& table, const std::string& path);

ResultTable parse_table(const std::string& text);
ResultTable read_table(const std::string& path);

}  // namespace effham
