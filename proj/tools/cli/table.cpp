#include "cli/table.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace vcqr::cli {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(trim(cur));
  return out;
}

} // namespace

Roles parse_roles(const std::string& spec)
{
  Roles roles;
  for (const std::string& part : split(spec, ',')) {
    if (part.empty()) {
      continue;
    }
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InvalidArgument,
                  "roles: expected key=value, got '" + part + "'");
    }
    const std::string key = trim(part.substr(0, eq));
    const std::string value = trim(part.substr(eq + 1));
    if (key == "u") {
      roles.u = value;
    } else if (key == "y") {
      roles.y = value;
    } else if (key == "x") {
      for (const std::string& col : split(value, '+')) {
        if (!col.empty()) {
          roles.x.push_back(col);
        }
      }
    } else if (key == "z") {
      if (value == "rest") {
        roles.z_rest = true;
      } else {
        for (const std::string& col : split(value, '+')) {
          if (!col.empty()) {
            roles.z.push_back(col);
          }
        }
      }
    } else {
      throw Error(ErrorCode::InvalidArgument, "roles: unknown key '" + key + "'");
    }
  }
  if (roles.u.empty() || roles.y.empty()) {
    throw Error(ErrorCode::InvalidArgument, "roles: u and y are required");
  }
  return roles;
}

namespace {

ColumnEncoding fit_encoding(const Table& table, const std::string& name,
                            const EncodingOptions& options, std::size_t train_rows)
{
  const std::size_t col = table.column(name);
  ColumnEncoding enc;
  enc.name = name;

  const bool forced = std::find(options.categorical.begin(), options.categorical.end(),
                                name) != options.categorical.end();
  bool numeric = true;
  double value = 0.0;
  for (std::size_t i = 0; i < train_rows; ++i) {
    if (!parse_number(table.rows[i][col], &value)) {
      numeric = false;
      break;
    }
  }
  enc.categorical = forced || !numeric;

  if (enc.categorical) {
    for (std::size_t i = 0; i < train_rows; ++i) {
      const std::string& cell = table.rows[i][col];
      if (std::find(enc.levels.begin(), enc.levels.end(), cell) == enc.levels.end()) {
        enc.levels.push_back(cell);
      }
    }
    if (enc.levels.size() < 2) {
      throw Error(ErrorCode::DegenerateColumn,
                  "column '" + name + "' has a single level on the training rows");
    }
    enc.reference = options.ref_policy == RefPolicy::FirstLevel ? 0
                                                                : enc.levels.size() - 1;
    return enc;
  }

  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < train_rows; ++i) {
    parse_number(table.rows[i][col], &value);
    sum += value;
    sumsq += value * value;
  }
  const double n = static_cast<double>(train_rows);
  enc.mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * enc.mean * enc.mean) / (n - 1.0));
  enc.scale = std::sqrt(var);
  if (options.standardize && enc.scale <= 0.0) {
    throw Error(ErrorCode::DegenerateColumn,
                "column '" + name + "' is constant after standardization");
  }
  if (!options.standardize) {
    enc.mean = 0.0;
    enc.scale = 1.0;
  }
  return enc;
}

void expand_names(const std::vector<ColumnEncoding>& encodings,
                  std::vector<std::string>& names)
{
  names.clear();
  for (const ColumnEncoding& enc : encodings) {
    if (!enc.categorical) {
      names.push_back(enc.name);
      continue;
    }
    for (std::size_t l = 0; l < enc.levels.size(); ++l) {
      if (l != enc.reference) {
        names.push_back(enc.name + "=" + enc.levels[l]);
      }
    }
  }
}

} // namespace

DesignSpec DesignSpec::fit(const Table& table, const Roles& roles,
                           const EncodingOptions& options, std::size_t train_rows)
{
  if (train_rows == 0 || train_rows > table.rows.size()) {
    throw Error(ErrorCode::InvalidArgument, "training split out of range");
  }
  DesignSpec spec;
  spec.roles = roles;
  spec.options = options;

  // resolve z=rest against the named roles
  if (roles.z_rest) {
    std::set<std::string> taken{roles.u, roles.y};
    taken.insert(roles.x.begin(), roles.x.end());
    spec.roles.z.clear();
    for (const std::string& name : table.header) {
      if (taken.find(name) == taken.end()) {
        spec.roles.z.push_back(name);
      }
    }
  }

  for (const std::string& name : spec.roles.x) {
    spec.x_encodings.push_back(fit_encoding(table, name, options, train_rows));
    if (spec.x_encodings.back().categorical) {
      throw Error(ErrorCode::InvalidArgument,
                  "varying-coefficient column '" + name + "' cannot be categorical");
    }
  }
  for (const std::string& name : spec.roles.z) {
    spec.z_encodings.push_back(fit_encoding(table, name, options, train_rows));
  }
  expand_names(spec.x_encodings, spec.x_names);
  expand_names(spec.z_encodings, spec.z_names);
  return spec;
}

Dataset DesignSpec::build(const Table& table, std::size_t begin, std::size_t end) const
{
  if (begin >= end || end > table.rows.size()) {
    throw Error(ErrorCode::InvalidArgument, "row range out of bounds");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(end - begin);
  const std::size_t u_col = table.column(roles.u);
  const std::size_t y_col = table.column(roles.y);

  Eigen::VectorXd u(n), y(n);
  Eigen::Index d1 = 0, d2 = 0;
  for (const ColumnEncoding& enc : x_encodings) {
    d1 += enc.width();
  }
  for (const ColumnEncoding& enc : z_encodings) {
    d2 += enc.width();
  }
  Eigen::MatrixXd x(n, d1), z(n, d2);

  auto fill = [&](const std::vector<ColumnEncoding>& encodings, Eigen::MatrixXd& out,
                  std::size_t table_row, Eigen::Index design_row) {
    Eigen::Index col = 0;
    for (const ColumnEncoding& enc : encodings) {
      const std::size_t src = table.column(enc.name);
      const std::string& cell = table.rows[table_row][src];
      if (enc.categorical) {
        for (std::size_t l = 0; l < enc.levels.size(); ++l) {
          if (l == enc.reference) {
            continue;
          }
          out(design_row, col++) = cell == enc.levels[l] ? 1.0 : 0.0;
        }
      } else {
        double v = 0.0;
        if (!parse_number(cell, &v)) {
          throw Error(ErrorCode::ParseError,
                      "row " + std::to_string(table_row + 2) + ": column '" + enc.name +
                        "': not a number: '" + cell + "'");
        }
        out(design_row, col++) = enc.scale > 0.0 && options.standardize
          ? (v - enc.mean) / enc.scale
          : v;
      }
    }
  };

  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t r = begin + static_cast<std::size_t>(i);
    double v = 0.0;
    if (!parse_number(table.rows[r][u_col], &v)) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 2) +
                                           ": index column is not numeric");
    }
    u[i] = v;
    if (!parse_number(table.rows[r][y_col], &v)) {
      throw Error(ErrorCode::ParseError, "row " + std::to_string(r + 2) +
                                           ": response column is not numeric");
    }
    y[i] = v;
    fill(x_encodings, x, r, i);
    fill(z_encodings, z, r, i);
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y),
          options.include_baseline};
}

} // namespace vcqr::cli
