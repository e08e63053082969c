#pragma once

#include <Eigen/Dense>

#include "vcqr/fit_options.hpp"
#include "vcqr/kernels.hpp"
#include "vcqr/model.hpp"

namespace vcqr {

//! Least-squares analogue of the three-stage procedure: local weighted
//! least squares, OLS refinement of beta on partial residuals, local
//! re-smoothing of the curves. Serves as the comparator for the relative
//! efficiency metrics.
SemiFit fit_semi_ls(const Dataset& data, double h1, double h3, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid, const FitOptions& options = {});

//! Stage 3 alone: local weighted least squares of y - z'beta on the grid.
CurveSet stage3_refine_curves_ls(const Dataset& data, const Eigen::VectorXd& beta_hat,
                                 double h, const KernelSpec& kernel,
                                 const Eigen::VectorXd& grid,
                                 const FitOptions& options = {},
                                 double* objective_total = nullptr);

} // namespace vcqr
