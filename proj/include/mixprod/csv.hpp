#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace mixprod {

// A parsed CSV dataset: every column is numeric except an optional integer
// column named "truth", which is split off into labels.
struct CsvDataset {
  Eigen::MatrixXd data;
  std::vector<int> truth;                 // empty when the file has none
  std::vector<std::string> column_names;  // value columns, in file order
};

// Text that parses back to exactly the same double (17 significant digits,
// trailing zeros trimmed).
std::string format_double(double value);

// Reads a comma-separated file with a mandatory header row. Cells must parse
// fully as numbers; violations raise a parse error naming the file line and
// column. A missing or unreadable file raises an I/O error with the path.
CsvDataset read_csv(const std::string& path);

// Writes columns named x1..xd plus, when given, a trailing integer column
// named truth. Values round-trip exactly through read_csv.
void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& data,
                       const std::vector<int>* truth_labels = nullptr);

// Single integer column under the header "label".
void write_labels_csv(const std::string& path, const std::vector<int>& labels);
std::vector<int> read_labels_csv(const std::string& path);

}  // namespace mixprod
