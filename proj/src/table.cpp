#include "effham/table.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "cli-io";

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, int line) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw Error(kModule, "table line " + std::to_string(line) + ": '" + s + "' is not a number");
  return v;
}

}  // namespace

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size())
    throw Error(kModule, "table row has " + std::to_string(row.size()) + " values for " +
                             std::to_string(columns.size()) + " columns");
  rows.push_back(std::move(row));
}

void ResultTable::add_meta(std::string key, std::string value) {
  metadata.emplace_back(std::move(key), std::move(value));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_table(const ResultTable& table) {
  std::string out;
  for (const auto& [k, v] : table.metadata) {
    if (k.find('\n') != std::string::npos || v.find('\n') != std::string::npos)
      throw Error(kModule, "table metadata must be single-line (key '" + k + "')");
    out += "# " + k + ": " + v + "\n";
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (table.columns[c].find_first_of(",\n#") != std::string::npos)
      throw Error(kModule, "column name '" + table.columns[c] + "' contains a reserved character");
    out += (c ? "," : "") + table.columns[c];
  }
  out += "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size()) throw Error(kModule, "table is not rectangular");
    for (std::size_t c = 0; c < row.size(); ++c) out += (c ? "," : "") + format_number(row[c]);
    out += "\n";
  }
  return out;
}

void write_table(const ResultTable& table, const std::string& path) {
  const std::string text = format_table(table);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(kModule, "cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw Error(kModule, "write to '" + path + "' failed");
}

ResultTable parse_table(const std::string& text) {
  ResultTable t;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++n;
    if (!header && line.rfind("# ", 0) == 0) {
      const auto colon = line.find(": ", 2);
      if (colon == std::string::npos) throw Error(kModule, "table line " + std::to_string(n) + ": malformed metadata");
      t.add_meta(line.substr(2, colon - 2), line.substr(colon + 2));
      continue;
    }
    if (!header) {
      t.columns = line.empty() ? std::vector<std::string>{} : split_commas(line);
      header = true;
      continue;
    }
    std::vector<double> row;
    for (const auto& cell : split_commas(line)) row.push_back(parse_number(cell, n));
    if (row.size() != t.columns.size())
      throw Error(kModule, "table line " + std::to_string(n) + ": row arity does not match the header");
    t.rows.push_back(std::move(row));
  }
  if (!header) throw Error(kModule, "table has no header row");
  return t;
}

ResultTable read_table(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(kModule, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_table(ss.str());
}

}  // namespace effham
