#pragma once

// Shared machinery for the local polynomial stages. Both the single-level
// and the composite estimators assemble the same weighted design
//   [ level intercepts | (u - u0) | x | x (u - u0) | z ]
// and differ only in which blocks are present.

#include <Eigen/Dense>

#include "vcqr/kernels.hpp"
#include "vcqr/model.hpp"
#include "vcqr/pinball.hpp"

namespace vcqr::detail {

struct LocalDesign {
  Eigen::VectorXd levels;       // quantile levels (size q)
  bool level_intercepts = true; // one intercept column per level
  bool baseline_slope = true;   // shared (u - u0) column
  bool include_z = true;

  Eigen::Index q() const { return levels.size(); }
  Eigen::Index cols(Eigen::Index d1, Eigen::Index d2) const
  {
    return (level_intercepts ? q() : 0) + (baseline_slope ? 1 : 0) + 2 * d1 +
           (include_z ? d2 : 0);
  }
  //! Observations needed in a window to determine the local fit.
  Eigen::Index required_obs(Eigen::Index d1, Eigen::Index d2) const
  {
    return (level_intercepts ? 1 : 0) + (baseline_slope ? 1 : 0) + 2 * d1 +
           (include_z ? d2 : 0);
  }
};

struct LocalFit {
  Eigen::VectorXd intercepts;   // per-level, zero when absent from the design
  double baseline_slope = 0.0;
  Eigen::VectorXd alpha;        // d1
  Eigen::VectorXd alpha_slope;  // d1
  Eigen::VectorXd beta;         // d2 (empty when z excluded)
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

//! Composite local problem at u0 for the given response vector.
PinballProblem build_local_problem(const Dataset& data, const Eigen::VectorXd& response,
                                   const LocalDesign& design, double u0, double h,
                                   const KernelSpec& kernel);

//! Solve and unpack the local problem.
LocalFit local_composite_fit(const Dataset& data, const Eigen::VectorXd& response,
                             const LocalDesign& design, double u0, double h,
                             const KernelSpec& kernel, const PinballSolveOptions& options);

//! Design choices for a quantile stage given the model shape.
LocalDesign qr_design(const Dataset& data, double tau, bool include_z);
LocalDesign cqr_design(const Dataset& data, const QuantileGrid& qgrid, bool include_z);

} // namespace vcqr::detail
