#include "local_fit.hpp"

#include <string>
#include <vector>

namespace vcqr::detail {

PinballProblem build_local_problem(const Dataset& data, const Eigen::VectorXd& response,
                                   const LocalDesign& design, double u0, double h,
                                   const KernelSpec& kernel)
{
  const Eigen::Index d1 = data.d1();
  const Eigen::Index d2 = design.include_z ? data.d2() : 0;
  const Eigen::Index q = design.q();

  const Eigen::VectorXd w =
    local_weights(kernel, data.u, u0, h, design.required_obs(d1, data.d2()));

  std::vector<Eigen::Index> window;
  window.reserve(static_cast<std::size_t>(data.n()));
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (w[i] > 0.0) {
      window.push_back(i);
    }
  }

  const Eigen::Index m = static_cast<Eigen::Index>(window.size());
  const Eigen::Index p = design.cols(d1, data.d2());
  Eigen::MatrixXd feats(m * q, p);
  Eigen::VectorXd resp(m * q), taus(m * q), weights(m * q);

  const Eigen::Index slope_col = design.level_intercepts ? q : 0;
  const Eigen::Index x_col = slope_col + (design.baseline_slope ? 1 : 0);
  const Eigen::Index xs_col = x_col + d1;
  const Eigen::Index z_col = xs_col + d1;

  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < q; ++k) {
    for (Eigen::Index idx = 0; idx < m; ++idx, ++r) {
      const Eigen::Index i = window[static_cast<std::size_t>(idx)];
      const double du = data.u[i] - u0;
      feats.row(r).setZero();
      if (design.level_intercepts) {
        feats(r, k) = 1.0;
      }
      if (design.baseline_slope) {
        feats(r, slope_col) = du;
      }
      for (Eigen::Index j = 0; j < d1; ++j) {
        feats(r, x_col + j) = data.x(i, j);
        feats(r, xs_col + j) = data.x(i, j) * du;
      }
      for (Eigen::Index j = 0; j < d2; ++j) {
        feats(r, z_col + j) = data.z(i, j);
      }
      resp[r] = response[i];
      taus[r] = design.levels[k];
      weights[r] = w[i];
    }
  }
  return {std::move(feats), std::move(resp), std::move(taus), std::move(weights)};
}

LocalFit local_composite_fit(const Dataset& data, const Eigen::VectorXd& response,
                             const LocalDesign& design, double u0, double h,
                             const KernelSpec& kernel, const PinballSolveOptions& options)
{
  const PinballProblem problem = build_local_problem(data, response, design, u0, h, kernel);
  const PinballSolution sol = solve_pinball(problem, options);

  const Eigen::Index d1 = data.d1();
  const Eigen::Index d2 = design.include_z ? data.d2() : 0;
  const Eigen::Index q = design.q();
  const Eigen::Index slope_col = design.level_intercepts ? q : 0;
  const Eigen::Index x_col = slope_col + (design.baseline_slope ? 1 : 0);

  LocalFit fit;
  fit.intercepts = design.level_intercepts ? sol.coefficients.segment(0, q).eval()
                                           : Eigen::VectorXd::Zero(q).eval();
  fit.baseline_slope = design.baseline_slope ? sol.coefficients[slope_col] : 0.0;
  fit.alpha = sol.coefficients.segment(x_col, d1);
  fit.alpha_slope = sol.coefficients.segment(x_col + d1, d1);
  fit.beta = d2 > 0 ? sol.coefficients.segment(x_col + 2 * d1, d2).eval()
                    : Eigen::VectorXd();
  fit.objective = sol.objective;
  fit.status = sol.status;
  return fit;
}

LocalDesign qr_design(const Dataset& data, double tau, bool include_z)
{
  LocalDesign d;
  d.levels = Eigen::VectorXd::Constant(1, tau);
  d.level_intercepts = data.include_baseline;
  d.baseline_slope = data.include_baseline;
  d.include_z = include_z && data.d2() > 0;
  return d;
}

LocalDesign cqr_design(const Dataset& data, const QuantileGrid& qgrid, bool include_z)
{
  // The per-level intercepts stay in the design even without a baseline
  // curve: they absorb the error quantiles, which are nonzero constants
  // at every level except the median.
  LocalDesign d;
  d.levels = qgrid.taus;
  d.level_intercepts = true;
  d.baseline_slope = data.include_baseline;
  d.include_z = include_z && data.d2() > 0;
  return d;
}

} // namespace vcqr::detail
