#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace locscale {

// One parsed CSV column. A column is numeric unless some non-missing cell
// fails to parse as a number or the caller forced it categorical.
struct Column {
  std::string name;
  bool numeric = true;
  std::vector<double> values;      // numeric payload (NaN where missing)
  std::vector<std::string> labels; // raw text, kept for categorical use
  std::vector<char> missing;       // 1 where the cell was empty / NA
};

class DataTable {
 public:
  static DataTable read_csv(const std::string& path,
                            const std::vector<std::string>& force_categorical = {});
  static DataTable from_cells(std::vector<std::string> header,
                              std::vector<std::vector<std::string>> rows,
                              const std::vector<std::string>& force_categorical = {});

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return columns_.size(); }
  bool has_column(const std::string& name) const;
  const Column& column(const std::string& name) const;
  const std::vector<Column>& columns() const { return columns_; }

  // FNV-1a over dimensions and raw cell text; stable across runs.
  std::uint64_t fingerprint() const;

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

}  // namespace locscale
