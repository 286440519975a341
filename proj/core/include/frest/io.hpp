#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace frest {

/// Shortest decimal representation that round-trips the 64-bit value, so
/// repeated runs produce byte-identical files.
std::string format_double(double value);

struct CsvMatrix {
  Eigen::MatrixXd values;
  std::vector<std::string> column_labels;  // empty when the file has no header
};

/// Rectangular numeric CSV. A header row is auto-detected (first row with at
/// least one non-numeric cell). Ragged rows and non-numeric body cells raise
/// InvalidInputError naming the offending row (and column).
CsvMatrix load_csv_matrix(const std::string& path);

/// Writes rows of doubles, optionally preceded by a header row. The file is
/// written to a temporary sibling and renamed into place.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& header = {});

/// Complex matrix as interleaved real/imaginary columns re_0,im_0,re_1,im_1,...
void write_csv_complex(const std::string& path, const Eigen::MatrixXcd& values);

/// Atomic text write: temp file in the same directory, then rename.
void atomic_write_text(const std::string& path, const std::string& content);

}  // namespace frest
