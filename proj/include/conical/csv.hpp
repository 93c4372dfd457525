#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "conical/errors.hpp"
#include "conical/matrix.hpp"

namespace conical {

// Matrix CSV format: one row per line, comma-separated decimals, no header
// by default. Values are written with 17 significant digits so a round trip
// is exact.

inline DenseMatrix read_matrix_csv_stream(std::istream& in, bool skip_header,
                                          const std::string& name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (first && skip_header) {
      first = false;
      continue;
    }
    first = false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    std::size_t colno = 0;
    while (start <= line.size()) {
      ++colno;
      const std::size_t comma = line.find(',', start);
      const std::string cell =
          line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || (end && *end != '\0' && !std::isspace(*end))) {
        throw ValidationError(name + ": unparseable value at row " + std::to_string(lineno) +
                              ", column " + std::to_string(colno));
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ValidationError(name + ": row " + std::to_string(lineno) + " has " +
                            std::to_string(row.size()) + " values, expected " +
                            std::to_string(rows.front().size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ValidationError(name + ": no data rows");
  DenseMatrix out(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (!std::isfinite(rows[i][j])) {
        throw ValidationError(name + ": non-finite value at row " + std::to_string(i + 1) +
                              ", column " + std::to_string(j + 1));
      }
      out(i, j) = rows[i][j];
    }
  }
  return out;
}

inline DenseMatrix read_matrix_csv(const std::string& path, bool skip_header = false) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  return read_matrix_csv_stream(in, skip_header, path);
}

inline std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_matrix_csv_stream(std::ostream& out, const DenseMatrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_value(m(i, j));
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path);
  write_matrix_csv_stream(out, m);
}

}  // namespace conical
