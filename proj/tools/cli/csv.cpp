#include "cli/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace vcqr::cli {

std::size_t Table::column(const std::string& name) const
{
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == name) {
      return j;
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown column '" + name + "'");
}

bool Table::has_column(const std::string& name) const
{
  for (const std::string& h : header) {
    if (h == name) {
      return true;
    }
  }
  return false;
}

namespace {

std::vector<std::string> split_line(const std::string& line, bool comma)
{
  std::vector<std::string> cells;
  if (comma) {
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
      // trim surrounding whitespace
      const auto b = cell.find_first_not_of(" \t\r");
      const auto e = cell.find_last_not_of(" \t\r");
      cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') {
      cells.push_back("");
    }
  } else {
    std::istringstream ss(line);
    std::string cell;
    while (ss >> cell) {
      cells.push_back(cell);
    }
  }
  return cells;
}

} // namespace

Table read_table(const std::string& path)
{
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, path + ": cannot open file");
  }
  std::string line;
  std::size_t lineno = 0;
  // first non-empty line is the header; the delimiter is inferred from it
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      break;
    }
  }
  if (line.empty() && !in) {
    throw Error(ErrorCode::ParseError, path + ": empty file");
  }
  const bool comma = line.find(',') != std::string::npos;
  Table table;
  table.header = split_line(line, comma);
  if (table.header.empty()) {
    throw Error(ErrorCode::ParseError, path + ":1: empty header");
  }

  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    std::vector<std::string> cells = split_line(line, comma);
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::ParseError,
                  path + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(table.header.size()) + " fields, got " +
                    std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.rows.empty()) {
    throw Error(ErrorCode::ParseError, path + ": no data rows");
  }
  return table;
}

bool parse_number(const std::string& cell, double* out)
{
  if (cell.empty()) {
    return false;
  }
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE || !std::isfinite(v)) {
    return false;
  }
  *out = v;
  return true;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const Eigen::MatrixXd& columns)
{
  if (static_cast<Eigen::Index>(header.size()) != columns.cols()) {
    throw Error(ErrorCode::MismatchedLengths, "write_csv: header/column mismatch");
  }
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    out << (j ? "," : "") << header[j];
  }
  out << "\n";
  char buf[40];
  for (Eigen::Index i = 0; i < columns.rows(); ++i) {
    for (Eigen::Index j = 0; j < columns.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", columns(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
}

} // namespace vcqr::cli
