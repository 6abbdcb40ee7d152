#include "mixprod/csv.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mixprod/common.hpp"

namespace mixprod {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    std::string::size_type comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// file lines with the trailing \r of CRLF files stripped
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "cannot open " + path);
  }
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  if (in.bad()) {
    throw Error(ErrorCode::io_error, "read failed on " + path);
  }
  return lines;
}

[[noreturn]] void bad_cell(const std::string& path, std::size_t line_number,
                           std::size_t column_number, const std::string& cell) {
  throw Error(ErrorCode::parse_error,
              path + ": line " + std::to_string(line_number) + ", column " +
                  std::to_string(column_number) + ": cannot parse \"" + cell +
                  "\" as a number");
}

double parse_cell(const std::string& path, std::size_t line_number,
                  std::size_t column_number, const std::string& cell) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [rest, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || rest != end || cell.empty()) {
    bad_cell(path, line_number, column_number, cell);
  }
  return value;
}

int parse_label(const std::string& path, std::size_t line_number,
                std::size_t column_number, const std::string& cell) {
  int value = 0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  auto [rest, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || rest != end || cell.empty()) {
    throw Error(ErrorCode::parse_error,
                path + ": line " + std::to_string(line_number) + ", column " +
                    std::to_string(column_number) + ": cannot parse \"" +
                    cell + "\" as an integer label");
  }
  return value;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::io_error, "cannot write " + path);
  }
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) {
    throw Error(ErrorCode::io_error, "write failed on " + path);
  }
}

}  // namespace

std::string format_double(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

CsvDataset read_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) {
    throw Error(ErrorCode::parse_error, path + ": missing header row");
  }
  std::vector<std::string> header = split_fields(lines[0]);
  std::ptrdiff_t truth_column = -1;
  CsvDataset out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "truth") {
      if (truth_column >= 0) {
        throw Error(ErrorCode::parse_error,
                    path + ": more than one truth column");
      }
      truth_column = static_cast<std::ptrdiff_t>(c);
    } else {
      out.column_names.push_back(header[c]);
    }
  }
  if (out.column_names.empty()) {
    throw Error(ErrorCode::parse_error, path + ": no value columns");
  }
  if (lines.size() < 2) {
    throw Error(ErrorCode::parse_error, path + ": no data rows");
  }

  const std::size_t rows = lines.size() - 1;
  out.data.resize(static_cast<Eigen::Index>(rows),
                  static_cast<Eigen::Index>(out.column_names.size()));
  if (truth_column >= 0) out.truth.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t line_number = r + 2;  // 1-based, after the header
    std::vector<std::string> fields = split_fields(lines[r + 1]);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::parse_error,
                  path + ": line " + std::to_string(line_number) + ": expected " +
                      std::to_string(header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (static_cast<std::ptrdiff_t>(c) == truth_column) {
        out.truth[r] = parse_label(path, line_number, c + 1, fields[c]);
      } else {
        out.data(static_cast<Eigen::Index>(r), j++) =
            parse_cell(path, line_number, c + 1, fields[c]);
      }
    }
  }
  return out;
}

void write_dataset_csv(const std::string& path, const Eigen::MatrixXd& data,
                       const std::vector<int>* truth_labels) {
  if (truth_labels != nullptr &&
      truth_labels->size() != static_cast<std::size_t>(data.rows())) {
    throw Error(ErrorCode::invalid_argument,
                "need exactly one truth label per data row");
  }
  std::ofstream out = open_for_write(path);
  for (Eigen::Index j = 0; j < data.cols(); ++j) {
    if (j > 0) out << ',';
    out << 'x' << j + 1;
  }
  if (truth_labels != nullptr) out << ",truth";
  out << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(data(i, j));
    }
    if (truth_labels != nullptr) {
      out << ',' << (*truth_labels)[static_cast<std::size_t>(i)];
    }
    out << '\n';
  }
  finish_write(out, path);
}

void write_labels_csv(const std::string& path, const std::vector<int>& labels) {
  std::ofstream out = open_for_write(path);
  out << "label\n";
  for (int z : labels) out << z << '\n';
  finish_write(out, path);
}

std::vector<int> read_labels_csv(const std::string& path) {
  std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || lines[0] != "label") {
    throw Error(ErrorCode::parse_error,
                path + ": expected a single \"label\" header");
  }
  std::vector<int> labels;
  labels.reserve(lines.size() - 1);
  for (std::size_t r = 1; r < lines.size(); ++r) {
    labels.push_back(parse_label(path, r + 1, 1, lines[r]));
  }
  return labels;
}

}  // namespace mixprod
