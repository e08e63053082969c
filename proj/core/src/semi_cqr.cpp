#include "vcqr/semi_cqr.hpp"

#include "local_fit.hpp"
#include "three_stage.hpp"

namespace vcqr {

LocalCqrFit stage1_local_cqr(const Dataset& data, double u0, const QuantileGrid& qgrid,
                             double h, const KernelSpec& kernel,
                             const PinballSolveOptions& options)
{
  const detail::LocalDesign design = detail::cqr_design(data, qgrid, true);
  const detail::LocalFit f = detail::local_composite_fit(data, data.y, design, u0, h,
                                                         kernel, options);
  LocalCqrFit out;
  out.intercepts = f.intercepts;
  out.b0 = f.baseline_slope;
  out.alpha = f.alpha;
  out.alpha_slope = f.alpha_slope;
  out.beta = f.beta;
  out.objective = f.objective;
  out.status = f.status;
  return out;
}

BetaRefinement stage2_refine_beta_cqr(const Dataset& data, const CurveSet& stage1_curves,
                                      const QuantileGrid& qgrid,
                                      const PinballSolveOptions& options)
{
  return detail::refine_beta(data, stage1_curves, qgrid.taus, options);
}

CurveSet stage3_refine_curves_cqr(const Dataset& data, const Eigen::VectorXd& beta_hat,
                                  const QuantileGrid& qgrid, double h,
                                  const KernelSpec& kernel, const Eigen::VectorXd& grid,
                                  const FitOptions& options, double* objective_total)
{
  detail::LocalDesign design = detail::cqr_design(data, qgrid, false);
  return detail::fit_stage3(data, beta_hat, design, h, kernel, grid, options,
                            objective_total);
}

SemiFit fit_semi_cqr(const Dataset& data, const QuantileGrid& qgrid, double h1, double h3,
                     const KernelSpec& kernel, const Eigen::VectorXd& grid,
                     const FitOptions& options)
{
  const detail::LocalDesign design = detail::cqr_design(data, qgrid, true);
  SemiFit fit = detail::fit_three_stage(data, design, h1, h3, kernel, grid, options,
                                        FitMethod::CQR, 0.5);
  return fit;
}

} // namespace vcqr
