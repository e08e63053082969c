#include "vcqr/semi_qr.hpp"

#include "local_fit.hpp"
#include "three_stage.hpp"

namespace vcqr {

LocalQrFit stage1_local_qr(const Dataset& data, double u0, double tau, double h,
                           const KernelSpec& kernel, const PinballSolveOptions& options)
{
  const detail::LocalDesign design = detail::qr_design(data, tau, true);
  const detail::LocalFit f = detail::local_composite_fit(data, data.y, design, u0, h,
                                                         kernel, options);
  LocalQrFit out;
  out.a0 = f.intercepts[0];
  out.b0 = f.baseline_slope;
  out.alpha = f.alpha;
  out.alpha_slope = f.alpha_slope;
  out.beta = f.beta;
  out.objective = f.objective;
  out.status = f.status;
  return out;
}

BetaRefinement stage2_refine_beta(const Dataset& data, const CurveSet& stage1_curves,
                                  double tau, const PinballSolveOptions& options)
{
  return detail::refine_beta(data, stage1_curves, Eigen::VectorXd::Constant(1, tau),
                             options);
}

CurveSet stage3_refine_curves(const Dataset& data, const Eigen::VectorXd& beta_hat,
                              double tau, double h, const KernelSpec& kernel,
                              const Eigen::VectorXd& grid, const FitOptions& options,
                              double* objective_total)
{
  detail::LocalDesign design = detail::qr_design(data, tau, false);
  return detail::fit_stage3(data, beta_hat, design, h, kernel, grid, options,
                            objective_total);
}

SemiFit fit_semi_qr(const Dataset& data, double tau, double h1, double h3,
                    const KernelSpec& kernel, const Eigen::VectorXd& grid,
                    const FitOptions& options)
{
  const detail::LocalDesign design = detail::qr_design(data, tau, true);
  return detail::fit_three_stage(data, design, h1, h3, kernel, grid, options,
                                 FitMethod::QR, tau);
}

} // namespace vcqr
