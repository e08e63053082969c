#pragma once

// Turning a parsed table plus a role declaration into model matrices:
// dummy coding for categorical columns, train-set standardization for
// numeric ones.

#include <optional>
#include <string>
#include <vector>

#include <vcqr/model.hpp>

#include "cli/csv.hpp"

namespace vcqr::cli {

//! Parsed "u=col, x=a+b, z=rest, y=col" declaration.
struct Roles {
  std::string u;
  std::vector<std::string> x;
  std::vector<std::string> z;
  bool z_rest = false;
  std::string y;
};

Roles parse_roles(const std::string& spec);

enum class RefPolicy { FirstLevel, LastLevel };

struct EncodingOptions {
  bool standardize = true;
  std::vector<std::string> categorical;  //!< force-categorical column names
  RefPolicy ref_policy = RefPolicy::FirstLevel;
  bool include_baseline = true;
};

//! Per-source-column encoding decided on the training rows.
struct ColumnEncoding {
  std::string name;
  bool categorical = false;
  std::vector<std::string> levels;  //!< order of first appearance; [ref] dropped
  std::size_t reference = 0;
  double mean = 0.0;
  double scale = 1.0;

  Eigen::Index width() const
  {
    return categorical ? static_cast<Eigen::Index>(levels.size()) - 1 : 1;
  }
};

struct DesignSpec {
  Roles roles;
  EncodingOptions options;
  std::vector<ColumnEncoding> x_encodings;
  std::vector<ColumnEncoding> z_encodings;
  std::vector<std::string> x_names;  //!< expanded design column names
  std::vector<std::string> z_names;

  //! Fitted on the training rows; applies train statistics everywhere.
  static DesignSpec fit(const Table& table, const Roles& roles,
                        const EncodingOptions& options, std::size_t train_rows);

  Dataset build(const Table& table, std::size_t begin, std::size_t end) const;
};

} // namespace vcqr::cli
