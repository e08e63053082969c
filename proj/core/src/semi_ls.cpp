#include "vcqr/semi_ls.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "vcqr/parallel.hpp"

namespace vcqr {

namespace {

struct LocalLsFit {
  double a0 = 0.0;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  double objective = 0.0;
};

//! Weighted local linear least squares at u0 on the design
//! [1, (u-u0), x, x(u-u0), z] (baseline block dropped when absent).
LocalLsFit local_ls_fit(const Dataset& data, const Eigen::VectorXd& response,
                        bool include_z, double u0, double h, const KernelSpec& kernel)
{
  const Eigen::Index d1 = data.d1();
  const Eigen::Index d2 = include_z ? data.d2() : 0;
  const bool baseline = data.include_baseline;
  const Eigen::Index p = (baseline ? 2 : 0) + 2 * d1 + d2;

  const Eigen::VectorXd w = local_weights(kernel, data.u, u0, h, p);

  std::vector<Eigen::Index> window;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    if (w[i] > 0.0) {
      window.push_back(i);
    }
  }
  const Eigen::Index m = static_cast<Eigen::Index>(window.size());

  Eigen::MatrixXd design(m, p);
  Eigen::VectorXd resp(m), sqw(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = window[static_cast<std::size_t>(r)];
    const double du = data.u[i] - u0;
    Eigen::Index col = 0;
    if (baseline) {
      design(r, col++) = 1.0;
      design(r, col++) = du;
    }
    for (Eigen::Index j = 0; j < d1; ++j) {
      design(r, col++) = data.x(i, j);
    }
    for (Eigen::Index j = 0; j < d1; ++j) {
      design(r, col++) = data.x(i, j) * du;
    }
    for (Eigen::Index j = 0; j < d2; ++j) {
      design(r, col++) = data.z(i, j);
    }
    resp[r] = response[i];
    sqw[r] = std::sqrt(w[i]);
  }

  Eigen::MatrixXd wd = sqw.asDiagonal() * design;
  Eigen::VectorXd wy = sqw.cwiseProduct(resp);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(wd);
  if (qr.rank() < p) {
    throw Error(ErrorCode::InsufficientLocalData,
                "local least squares: singular normal equations at u0=" +
                  std::to_string(u0));
  }
  Eigen::VectorXd theta = qr.solve(wy);

  LocalLsFit fit;
  Eigen::Index col = 0;
  if (baseline) {
    fit.a0 = theta[col];
    col += 2;
  }
  fit.alpha = theta.segment(col, d1);
  col += 2 * d1;
  fit.beta = d2 > 0 ? theta.segment(col, d2).eval() : Eigen::VectorXd();
  fit.objective = (wy - wd * theta).squaredNorm();
  return fit;
}

} // namespace

SemiFit fit_semi_ls(const Dataset& data, double h1, double h3, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid, const FitOptions& options)
{
  if (!(h1 > 0.0) || !(h3 > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "fit_semi_ls: bandwidths must be positive");
  }
  const Eigen::Index n = data.n();
  const Eigen::Index d1 = data.d1();
  const Eigen::Index d2 = data.d2();

  // stage 1: local fits at every observation point
  std::vector<LocalLsFit> fits(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t i) {
    fits[i] = local_ls_fit(data, data.y, true, data.u[static_cast<Eigen::Index>(i)], h1,
                           kernel);
  });

  CurveSet stage1;
  stage1.grid = data.u;
  stage1.mode = CurveMode::AtObservations;
  stage1.alpha0_k.resize(1, n);
  stage1.alpha.resize(d1, n);
  Eigen::VectorXd initial_beta = Eigen::VectorXd::Zero(d2);
  double stage1_obj = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const LocalLsFit& f = fits[static_cast<std::size_t>(i)];
    stage1.alpha0_k(0, i) = f.a0;
    stage1.alpha.col(i) = f.alpha;
    if (d2 > 0) {
      initial_beta += f.beta;
    }
    stage1_obj += f.objective;
  }
  if (d2 > 0) {
    initial_beta /= static_cast<double>(n);
  }

  // stage 2: OLS of the partial residuals on z
  Eigen::VectorXd beta;
  double stage2_obj = 0.0;
  if (d2 > 0) {
    Eigen::VectorXd partial = data.y - stage1.alpha0_k.row(0).transpose();
    if (d1 > 0) {
      partial -= (data.x.array() * stage1.alpha.transpose().array())
                   .rowwise()
                   .sum()
                   .matrix();
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(data.z);
    if (qr.rank() < d2) {
      throw Error(ErrorCode::InsufficientLocalData,
                  "fit_semi_ls: z design is rank deficient");
    }
    beta = qr.solve(partial);
    stage2_obj = (partial - data.z * beta).squaredNorm();
  }

  // stage 3: local re-smoothing of y - z'beta
  Eigen::VectorXd adjusted = data.y;
  if (d2 > 0) {
    adjusted -= data.z * beta;
  }
  const Eigen::Index g = grid.size();
  std::vector<LocalLsFit> refits(static_cast<std::size_t>(g));
  parallel_for(static_cast<std::size_t>(g), options.threads, [&](std::size_t m) {
    refits[m] = local_ls_fit(data, adjusted, false, grid[static_cast<Eigen::Index>(m)],
                             h3, kernel);
  });

  CurveSet curves;
  curves.grid = grid;
  curves.mode = CurveMode::OnGrid;
  curves.alpha0_k.resize(1, g);
  curves.alpha.resize(d1, g);
  double stage3_obj = 0.0;
  for (Eigen::Index m = 0; m < g; ++m) {
    const LocalLsFit& f = refits[static_cast<std::size_t>(m)];
    curves.alpha0_k(0, m) = f.a0;
    curves.alpha.col(m) = f.alpha;
    stage3_obj += f.objective;
  }

  SemiFit fit;
  fit.method = FitMethod::LS;
  fit.q = 1;
  fit.tau = 0.5;
  fit.h_stage1 = h1;
  fit.h_stage3 = h3;
  fit.beta = std::move(beta);
  fit.initial_beta = std::move(initial_beta);
  fit.stage1_curves = std::move(stage1);
  fit.curves = std::move(curves);
  fit.objectives = {stage1_obj, stage2_obj, stage3_obj};
  fit.validate();
  return fit;
}

} // namespace vcqr
