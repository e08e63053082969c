#pragma once

#include <Eigen/Dense>

#include "vcqr/fit_options.hpp"
#include "vcqr/kernels.hpp"
#include "vcqr/model.hpp"

namespace vcqr {

//! Local linear quantile fit at a single point.
struct LocalQrFit {
  double a0 = 0.0;                //!< baseline value (0 when no baseline)
  double b0 = 0.0;                //!< baseline slope
  Eigen::VectorXd alpha;          //!< varying-coefficient values
  Eigen::VectorXd alpha_slope;    //!< their derivatives
  Eigen::VectorXd beta;           //!< local parametric coefficients
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

//! Stage 1: local linear quantile regression at u0 with kernel weights.
LocalQrFit stage1_local_qr(const Dataset& data, double u0, double tau, double h,
                           const KernelSpec& kernel,
                           const PinballSolveOptions& options = {});

//! Stage 2: global quantile regression of the partial residuals
//! y - a0(U) - x'a(U) on z. The curves must be stored at the observation
//! points of `data`.
BetaRefinement stage2_refine_beta(const Dataset& data, const CurveSet& stage1_curves,
                                  double tau, const PinballSolveOptions& options = {});

//! Stage 3: local refinement of the curves given the root-n beta.
CurveSet stage3_refine_curves(const Dataset& data, const Eigen::VectorXd& beta_hat,
                              double tau, double h, const KernelSpec& kernel,
                              const Eigen::VectorXd& grid, const FitOptions& options = {},
                              double* objective_total = nullptr);

//! The full three-stage estimator at a single quantile level.
SemiFit fit_semi_qr(const Dataset& data, double tau, double h1, double h3,
                    const KernelSpec& kernel, const Eigen::VectorXd& grid,
                    const FitOptions& options = {});

} // namespace vcqr
