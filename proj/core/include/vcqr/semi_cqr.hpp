#pragma once

#include <Eigen/Dense>

#include "vcqr/fit_options.hpp"
#include "vcqr/kernels.hpp"
#include "vcqr/model.hpp"

namespace vcqr {

//! Local linear composite quantile fit at a single point: level-specific
//! intercepts, shared slopes.
struct LocalCqrFit {
  Eigen::VectorXd intercepts;     //!< a0k, one per level
  double b0 = 0.0;                //!< shared baseline slope
  Eigen::VectorXd alpha;
  Eigen::VectorXd alpha_slope;
  Eigen::VectorXd beta;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;

  //! Initial baseline estimate: the average of the level intercepts.
  double baseline() const
  {
    return intercepts.size() > 0 ? intercepts.mean() : 0.0;
  }
};

//! Stage 1: one composite problem with n*q rows; slopes and beta are
//! shared across levels, intercepts are level-specific.
LocalCqrFit stage1_local_cqr(const Dataset& data, double u0, const QuantileGrid& qgrid,
                             double h, const KernelSpec& kernel,
                             const PinballSolveOptions& options = {});

//! Stage 2: composite quantile regression of the per-level partial
//! residuals y - a0k(U) - x'a(U) on z.
BetaRefinement stage2_refine_beta_cqr(const Dataset& data, const CurveSet& stage1_curves,
                                      const QuantileGrid& qgrid,
                                      const PinballSolveOptions& options = {});

//! Stage 3: composite local refinement of the curves given beta.
CurveSet stage3_refine_curves_cqr(const Dataset& data, const Eigen::VectorXd& beta_hat,
                                  const QuantileGrid& qgrid, double h,
                                  const KernelSpec& kernel, const Eigen::VectorXd& grid,
                                  const FitOptions& options = {},
                                  double* objective_total = nullptr);

//! The full three-stage composite estimator.
SemiFit fit_semi_cqr(const Dataset& data, const QuantileGrid& qgrid, double h1, double h3,
                     const KernelSpec& kernel, const Eigen::VectorXd& grid,
                     const FitOptions& options = {});

} // namespace vcqr
