#include "frest/io.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

#include "frest/errors.hpp"

namespace frest {

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc{} && result.ptr == end;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.emplace_back(line.substr(start));
      break;
    }
    fields.emplace_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

}  // namespace

CsvMatrix load_csv_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInputError("cannot open CSV file: " + path);
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) {
    throw InvalidInputError("CSV file is empty: " + path);
  }

  CsvMatrix out;
  std::size_t first_data_row = 0;
  {
    double ignored = 0.0;
    bool header = false;
    for (const auto& cell : rows.front()) {
      if (!parse_double(cell, ignored)) {
        header = true;
        break;
      }
    }
    if (header) {
      for (const auto& cell : rows.front()) {
        out.column_labels.emplace_back(trim(cell));
      }
      first_data_row = 1;
    }
  }
  if (first_data_row >= rows.size()) {
    throw InvalidInputError("CSV file has a header but no data rows: " + path);
  }

  const std::size_t n_cols = rows[first_data_row].size();
  const std::size_t n_rows = rows.size() - first_data_row;
  if (!out.column_labels.empty() && out.column_labels.size() != n_cols) {
    throw InvalidInputError(path + ": header has " +
                            std::to_string(out.column_labels.size()) +
                            " columns but row 2 has " + std::to_string(n_cols));
  }
  out.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (std::size_t r = 0; r < n_rows; ++r) {
    const auto& fields = rows[first_data_row + r];
    const std::size_t file_row = first_data_row + r + 1;  // 1-based, header included
    if (fields.size() != n_cols) {
      throw InvalidInputError(path + ": row " + std::to_string(file_row) + " has " +
                              std::to_string(fields.size()) + " columns, expected " +
                              std::to_string(n_cols));
    }
    for (std::size_t c = 0; c < n_cols; ++c) {
      double v = 0.0;
      if (!parse_double(fields[c], v)) {
        throw InvalidInputError(path + ": non-numeric cell at row " +
                                std::to_string(file_row) + ", column " +
                                std::to_string(c + 1) + ": '" + fields[c] + "'");
      }
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return out;
}

void atomic_write_text(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw InvalidInputError("cannot write file: " + tmp.string());
    }
    out << content;
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    throw InvalidInputError("cannot rename " + tmp.string() + " to " + path + ": " +
                            ec.message());
  }
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header) {
  std::ostringstream out;
  if (!header.empty()) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i > 0) out << ',';
      out << header[i];
    }
    out << '\n';
  }
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(values(r, c));
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_csv_complex(const std::string& path, const Eigen::MatrixXcd& values) {
  std::ostringstream out;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    if (c > 0) out << ',';
    out << "re_" << c << ",im_" << c;
  }
  out << '\n';
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (c > 0) out << ',';
      out << format_double(values(r, c).real()) << ','
          << format_double(values(r, c).imag());
    }
    out << '\n';
  }
  atomic_write_text(path, out.str());
}

}  // namespace frest
