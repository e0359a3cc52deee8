#include "locscale/table.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace locscale {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  bool in_quotes = false;
  for (char ch : line) {
    if (ch == '"') {
      in_quotes = !in_quotes;
    } else if (ch == ',' && !in_quotes) {
      out.push_back(trim(cell));
      cell.clear();
    } else {
      cell.push_back(ch);
    }
  }
  out.push_back(trim(cell));
  return out;
}

bool is_missing_token(const std::string& s) {
  return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan";
}

bool parse_number(const std::string& s, double* out) {
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') return false;
  *out = v;
  return true;
}

}  // namespace

DataTable DataTable::read_csv(const std::string& path,
                              const std::vector<std::string>& force_categorical) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open data file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty data file: " + path);
  std::vector<std::string> header = split_csv_line(line);
  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw std::runtime_error("malformed CSV row " + std::to_string(lineno) + " in " + path +
                               ": expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }
  return from_cells(std::move(header), std::move(rows), force_categorical);
}

DataTable DataTable::from_cells(std::vector<std::string> header,
                                std::vector<std::vector<std::string>> rows,
                                const std::vector<std::string>& force_categorical) {
  DataTable t;
  t.n_rows_ = rows.size();
  t.columns_.resize(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) {
    Column& col = t.columns_[j];
    col.name = trim(header[j]);
    if (col.name.empty()) throw std::runtime_error("empty column name in CSV header");
    const bool forced = std::find(force_categorical.begin(), force_categorical.end(), col.name) !=
                        force_categorical.end();
    col.numeric = !forced;
    col.values.resize(rows.size());
    col.labels.resize(rows.size());
    col.missing.resize(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string& cell = rows[i][j];
      col.labels[i] = cell;
      if (is_missing_token(cell)) {
        col.missing[i] = 1;
        col.values[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double v = 0.0;
      if (col.numeric && parse_number(cell, &v)) {
        col.values[i] = v;
      } else {
        col.numeric = false;
      }
    }
  }
  return t;
}

bool DataTable::has_column(const std::string& name) const {
  for (const auto& c : columns_)
    if (c.name == name) return true;
  return false;
}

const Column& DataTable::column(const std::string& name) const {
  for (const auto& c : columns_)
    if (c.name == name) return c;
  throw std::runtime_error("unknown column: " + name);
}

std::uint64_t DataTable::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 1099511628211ull;
    }
    h ^= 0x1f;
    h *= 1099511628211ull;
  };
  mix(std::to_string(n_rows_));
  mix(std::to_string(columns_.size()));
  for (const auto& c : columns_) {
    mix(c.name);
    for (const auto& cell : c.labels) mix(cell);
  }
  return h;
}

}  // namespace locscale
