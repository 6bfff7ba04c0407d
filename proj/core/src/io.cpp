#include "pcc/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "pcc/errors.hpp"

namespace pcc::io {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // Trim surrounding whitespace and CR.
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string()
                                         : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* begin = s.data();
  const char* end = begin + s.size();
  const auto res = std::from_chars(begin, end, out);
  return res.ec == std::errc() && res.ptr == end;
}

}  // namespace

std::string format_double(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_double_17(double x) {
  char buf[48];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open CSV file: " + path.string());
  std::string line;
  if (!std::getline(in, line))
    throw DataError("empty CSV file: " + path.string());
  const std::vector<std::string> header = split_line(line);
  if (header.empty()) throw DataError("CSV header is empty: " + path.string());

  std::vector<std::vector<std::string>> raw_rows;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_line(line);
    if (fields.size() != header.size())
      throw DataError("CSV row " + std::to_string(raw_rows.size() + 2) +
                      " has " + std::to_string(fields.size()) +
                      " fields, header has " + std::to_string(header.size()) +
                      ": " + path.string());
    raw_rows.push_back(std::move(fields));
  }
  if (raw_rows.empty()) throw DataError("CSV has no data rows: " + path.string());

  double probe;
  const bool has_labels = !parse_double(raw_rows.front().front(), probe);
  const std::size_t first_numeric = has_labels ? 1 : 0;
  const std::size_t n_cols = header.size() - first_numeric;
  if (n_cols == 0)
    throw DataError("CSV has no numeric columns: " + path.string());

  CsvTable table;
  table.column_names.assign(header.begin() + first_numeric, header.end());
  if (has_labels) table.label_header = header.front();
  table.values.resize(static_cast<Eigen::Index>(raw_rows.size()),
                      static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < raw_rows.size(); ++r) {
    if (has_labels) table.labels.push_back(raw_rows[r].front());
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v;
      if (!parse_double(raw_rows[r][first_numeric + c], v) || !std::isfinite(v))
        throw DataError("CSV cell (" + std::to_string(r + 2) + "," +
                        std::to_string(first_numeric + c + 1) +
                        ") is not a finite number: " + path.string());
      table.values(static_cast<Eigen::Index>(r),
                   static_cast<Eigen::Index>(c)) = v;
    }
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table,
               int precision) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open CSV for writing: " + path.string());
  const bool has_labels = !table.labels.empty();
  if (has_labels) {
    if (static_cast<Eigen::Index>(table.labels.size()) != table.values.rows())
      throw DataError("write_csv: label count does not match row count");
    out << table.label_header;
    if (!table.column_names.empty()) out << ',';
  }
  for (std::size_t c = 0; c < table.column_names.size(); ++c) {
    if (c) out << ',';
    out << table.column_names[c];
  }
  out << '\n';
  const auto fmt = [&](double x) {
    if (precision <= 0) return format_double(x);
    char buf[48];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x,
                                   std::chars_format::general, precision);
    return std::string(buf, res.ptr);
  };
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    if (has_labels) {
      out << table.labels[static_cast<std::size_t>(r)];
      if (table.values.cols() > 0) out << ',';
    }
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      if (c) out << ',';
      out << fmt(table.values(r, c));
    }
    out << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace pcc::io
