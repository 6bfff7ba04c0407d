#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

namespace pcc::io {

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double x);

// Fixed 17-significant-digit representation (always round-trip exact).
std::string format_double_17(double x);

// Numeric CSV with an optional leading label column (dates, names).
struct CsvTable {
  std::vector<std::string> column_names;  // numeric columns only
  std::vector<std::string> labels;        // empty when no label column
  std::string label_header;
  Eigen::MatrixXd values;                 // rows x numeric columns

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }
};

// Reads a CSV with a header row. If the first column of the first data row
// does not parse as a number, it is treated as a label column. Ragged rows,
// empty numeric fields, or non-numeric cells raise DataError.
CsvTable read_csv(const std::filesystem::path& path);

// Writes a CSV; precision 0 means shortest round-trip, otherwise that many
// significant digits.
void write_csv(const std::filesystem::path& path, const CsvTable& table,
               int precision = 0);

}  // namespace pcc::io
