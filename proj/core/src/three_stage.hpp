#pragma once

// Generic three-stage orchestration used by the quantile and composite
// quantile estimators; the two differ only in their local design.

#include <Eigen/Dense>

#include "local_fit.hpp"
#include "vcqr/fit_options.hpp"
#include "vcqr/model.hpp"

namespace vcqr::detail {

struct Stage1Result {
  CurveSet curves;               // at the observation points
  Eigen::VectorXd initial_beta;  // average of the local beta estimates
  double objective = 0.0;
  int crossings = 0;             // local level-intercept order violations
};

Stage1Result fit_stage1_all(const Dataset& data, const LocalDesign& design, double h,
                            const KernelSpec& kernel, const FitOptions& options);

//! Composite refinement problem: rows (k, i) with features z_i and
//! response y_i - a0k(U_i) - x_i'a(U_i).
PinballProblem build_refine_problem(const Dataset& data, const CurveSet& stage1_curves,
                                    const Eigen::VectorXd& levels);

BetaRefinement refine_beta(const Dataset& data, const CurveSet& stage1_curves,
                           const Eigen::VectorXd& levels,
                           const PinballSolveOptions& options);

CurveSet fit_stage3(const Dataset& data, const Eigen::VectorXd& beta_hat,
                    const LocalDesign& stage3_design, double h, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid, const FitOptions& options,
                    double* objective_total);

SemiFit fit_three_stage(const Dataset& data, const LocalDesign& design, double h1,
                        double h3, const KernelSpec& kernel, const Eigen::VectorXd& grid,
                        const FitOptions& options, FitMethod method, double tau);

} // namespace vcqr::detail
