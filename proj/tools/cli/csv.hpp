#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include <vcqr/errors.hpp>

namespace vcqr::cli {

//! A parsed delimited file: header row plus string cells.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const;
  bool has_column(const std::string& name) const;
};

//! Reads a comma- or whitespace-delimited file with a header row.
//! Malformed rows raise a parse error carrying the line number.
Table read_table(const std::string& path);

//! True when the cell parses as a finite double; value written to *out.
bool parse_number(const std::string& cell, double* out);

//! Writes a CSV with one column per name.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& columns);

} // namespace vcqr::cli
