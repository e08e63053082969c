#include "vcqr/model.hpp"

#include <cmath>
#include <string>

namespace vcqr {

Dataset::Dataset(Eigen::VectorXd u_, Eigen::MatrixXd x_, Eigen::MatrixXd z_,
                 Eigen::VectorXd y_, bool include_baseline_)
  : u(std::move(u_))
  , x(std::move(x_))
  , z(std::move(z_))
  , y(std::move(y_))
  , include_baseline(include_baseline_)
{
  const Eigen::Index n = y.size();
  if (n < 1) {
    throw Error(ErrorCode::InvalidArgument, "Dataset: empty response");
  }
  if (u.size() != n || x.rows() != n || z.rows() != n) {
    throw Error(ErrorCode::MismatchedLengths,
                "Dataset: u/x/z/y lengths differ (u=" + std::to_string(u.size()) +
                  ", x=" + std::to_string(x.rows()) + ", z=" + std::to_string(z.rows()) +
                  ", y=" + std::to_string(n) + ")");
  }
  if (x.cols() == 0 && z.cols() == 0) {
    throw Error(ErrorCode::InvalidArgument, "Dataset: d1 and d2 cannot both be zero");
  }
  if (!u.allFinite() || !y.allFinite() || !x.allFinite() || !z.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "Dataset: non-finite values");
  }
}

QuantileGrid::QuantileGrid(int q_)
  : q(q_)
{
  if (q < 1) {
    throw Error(ErrorCode::InvalidArgument, "QuantileGrid: q must be >= 1");
  }
  taus.resize(q);
  for (int k = 0; k < q; ++k) {
    taus[k] = static_cast<double>(k + 1) / (q + 1);
  }
}

Eigen::VectorXd CurveSet::baseline() const
{
  if (alpha0_k.rows() == 0) {
    return Eigen::VectorXd::Zero(grid.size());
  }
  return alpha0_k.colwise().mean();
}

Eigen::VectorXd evaluate_curveset(const CurveSet& curves, double u0)
{
  const Eigen::Index g = curves.grid.size();
  if (g == 0) {
    throw Error(ErrorCode::InvalidArgument, "evaluate_curveset: empty grid");
  }
  for (Eigen::Index i = 1; i < g; ++i) {
    if (!(curves.grid[i] > curves.grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument,
                  "evaluate_curveset: grid must be strictly increasing");
    }
  }
  if (u0 < curves.grid[0] || u0 > curves.grid[g - 1]) {
    throw Error(ErrorCode::ExtrapolationRefused,
                "evaluate_curveset: u0=" + std::to_string(u0) + " outside grid hull [" +
                  std::to_string(curves.grid[0]) + ", " + std::to_string(curves.grid[g - 1]) +
                  "]");
  }

  // locate the segment and interpolate; exact at grid points
  Eigen::Index hi = 0;
  while (hi < g && curves.grid[hi] < u0) {
    ++hi;
  }
  const Eigen::Index q = curves.alpha0_k.rows();
  const Eigen::Index d1 = curves.alpha.rows();
  Eigen::VectorXd out(q + d1);
  auto value_at = [&](auto&& row) -> double {
    if (hi < g && curves.grid[hi] == u0) {
      return row[hi];
    }
    const Eigen::Index lo = hi - 1;
    const double w = (u0 - curves.grid[lo]) / (curves.grid[hi] - curves.grid[lo]);
    return (1.0 - w) * row[lo] + w * row[hi];
  };
  for (Eigen::Index k = 0; k < q; ++k) {
    out[k] = value_at(curves.alpha0_k.row(k));
  }
  for (Eigen::Index j = 0; j < d1; ++j) {
    out[q + j] = value_at(curves.alpha.row(j));
  }
  return out;
}

void SemiFit::validate() const
{
  if (!beta.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "SemiFit: non-finite beta");
  }
  if (h_stage1 <= 0.0 || h_stage3 <= 0.0) {
    throw Error(ErrorCode::InvalidBandwidth, "SemiFit: bandwidths must be positive");
  }
  if (q < 1) {
    throw Error(ErrorCode::InvalidArgument, "SemiFit: q must be >= 1");
  }
}

Eigen::VectorXd uniform_grid(double lo, double hi, int points)
{
  if (points < 1 || !(hi >= lo)) {
    throw Error(ErrorCode::InvalidArgument, "uniform_grid: bad arguments");
  }
  if (points == 1) {
    Eigen::VectorXd g(1);
    g[0] = 0.5 * (lo + hi);
    return g;
  }
  return Eigen::VectorXd::LinSpaced(points, lo, hi);
}

double default_stage1_bandwidth(double h_stage3, Eigen::Index n)
{
  if (h_stage3 <= 0.0) {
    throw Error(ErrorCode::InvalidBandwidth, "default_stage1_bandwidth: h must be > 0");
  }
  return h_stage3 * std::pow(static_cast<double>(n), -0.1);
}

} // namespace vcqr
