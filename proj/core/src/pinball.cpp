#include "vcqr/pinball.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace vcqr {

namespace {

constexpr double kBig = 1e20;

//! Solves (A diag(d) A') sol = rhs in place, keeping the factorization.
//! Falls back to a tiny diagonal ridge when the normal matrix is not
//! numerically positive definite (rank-deficient active window).
class NormalSolver {
public:
  void factorize(const Eigen::MatrixXd& a, const Eigen::VectorXd& d)
  {
    const Eigen::Index p = a.rows();
    scaled_ = a * d.cwiseSqrt().asDiagonal();
    ada_.resize(p, p);
    ada_.setZero();
    ada_.selfadjointView<Eigen::Lower>().rankUpdate(scaled_);
    double ridge = 1e-10 * std::max(1.0, ada_.trace() / static_cast<double>(p));
    for (int attempt = 0; attempt < 3; ++attempt) {
      llt_.compute(ada_.selfadjointView<Eigen::Lower>());
      if (llt_.info() == Eigen::Success) {
        return;
      }
      ada_.diagonal().array() += ridge;
      ridge *= 1e4;
    }
    llt_.compute(ada_.selfadjointView<Eigen::Lower>());
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

private:
  Eigen::MatrixXd scaled_;
  Eigen::MatrixXd ada_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

//! Expands an L1 penalty into check-loss pseudo-rows: penalty_j |b_j| is
//! rho_{1/2} at zero response with weight 2 penalty_j, which keeps a single
//! solver for penalized and unpenalized problems.
void append_penalty_rows(const PinballProblem& problem, Eigen::MatrixXd& x,
                         Eigen::VectorXd& y, Eigen::VectorXd& tau, Eigen::VectorXd& w)
{
  const Eigen::Index p = problem.cols();
  const Eigen::VectorXd& penalty = problem.penalty();
  Eigen::Index extra = 0;
  for (Eigen::Index j = 0; j < penalty.size(); ++j) {
    if (penalty[j] > 0.0) {
      ++extra;
    }
  }
  const Eigen::Index n0 = x.rows();
  x.conservativeResize(n0 + extra, Eigen::NoChange);
  y.conservativeResize(n0 + extra);
  tau.conservativeResize(n0 + extra);
  w.conservativeResize(n0 + extra);
  Eigen::Index r = n0;
  for (Eigen::Index j = 0; j < penalty.size(); ++j) {
    if (penalty[j] > 0.0) {
      x.row(r).setZero();
      x(r, j) = 1.0;
      y[r] = 0.0;
      tau[r] = 0.5;
      w[r] = 2.0 * penalty[j];
      ++r;
    }
  }
  (void)p;
}

//! Rank of the zero-residual rows; an optimum supported by fewer than p
//! independent active rows lies on a flat face (non-unique minimizer).
bool flat_optimal_face(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& coef)
{
  const Eigen::Index p = x.cols();
  Eigen::VectorXd fitted = x * coef;
  std::vector<Eigen::Index> active;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double scale = 1.0 + std::abs(y[i]) + std::abs(fitted[i]);
    if (std::abs(y[i] - fitted[i]) <= 1e-6 * scale) {
      active.push_back(i);
    }
  }
  if (static_cast<Eigen::Index>(active.size()) < p) {
    return true;
  }
  Eigen::MatrixXd sub(active.size(), p);
  for (std::size_t k = 0; k < active.size(); ++k) {
    sub.row(static_cast<Eigen::Index>(k)) = x.row(active[k]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
  qr.setThreshold(1e-10);
  return qr.rank() < p;
}

} // namespace

PinballProblem::PinballProblem(Eigen::MatrixXd features, Eigen::VectorXd response,
                               Eigen::VectorXd tau, Eigen::VectorXd weight)
  : features_(std::move(features))
  , response_(std::move(response))
  , tau_(std::move(tau))
  , weight_(std::move(weight))
{
  const Eigen::Index n = response_.size();
  if (n == 0) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: no rows");
  }
  if (features_.rows() != n || tau_.size() != n || weight_.size() != n) {
    throw Error(ErrorCode::MismatchedLengths, "PinballProblem: row counts differ");
  }
  if (features_.cols() < 1) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: needs at least one feature");
  }
  if (!features_.allFinite() || !response_.allFinite()) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: non-finite data");
  }
  bool any_weight = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(tau_[i] > 0.0 && tau_[i] < 1.0)) {
      throw Error(ErrorCode::InvalidProblem,
                  "PinballProblem: tau must lie in (0,1), got " + std::to_string(tau_[i]));
    }
    if (!(weight_[i] >= 0.0)) {
      throw Error(ErrorCode::InvalidProblem, "PinballProblem: negative weight");
    }
    any_weight = any_weight || weight_[i] > 0.0;
  }
  if (!any_weight) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: all weights are zero");
  }
}

PinballProblem::PinballProblem(Eigen::MatrixXd features, Eigen::VectorXd response,
                               double tau)
  : PinballProblem(std::move(features), std::move(response),
                   Eigen::VectorXd::Constant(response.size(), tau),
                   Eigen::VectorXd::Ones(response.size()))
{
}

PinballProblem PinballProblem::from_rows(const std::vector<PinballRow>& rows)
{
  if (rows.empty()) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: no rows");
  }
  const Eigen::Index n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index p = rows.front().features.size();
  Eigen::MatrixXd x(n, p);
  Eigen::VectorXd y(n), tau(n), w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const PinballRow& r = rows[static_cast<std::size_t>(i)];
    if (r.features.size() != p) {
      throw Error(ErrorCode::MismatchedLengths, "PinballProblem: ragged feature rows");
    }
    x.row(i) = r.features;
    y[i] = r.response;
    tau[i] = r.tau;
    w[i] = r.weight;
  }
  return {std::move(x), std::move(y), std::move(tau), std::move(w)};
}

void PinballProblem::set_penalty(Eigen::VectorXd penalty)
{
  if (penalty.size() != 0 && penalty.size() != features_.cols()) {
    throw Error(ErrorCode::MismatchedLengths, "PinballProblem: penalty length != p");
  }
  if (penalty.size() > 0 && penalty.minCoeff() < 0.0) {
    throw Error(ErrorCode::InvalidProblem, "PinballProblem: negative penalty weight");
  }
  penalty_ = std::move(penalty);
}

PinballRow PinballProblem::row(Eigen::Index i) const
{
  return {features_.row(i).transpose(), response_[i], tau_[i], weight_[i]};
}

double pinball_objective(const PinballProblem& problem, const Eigen::VectorXd& coef)
{
  if (coef.size() != problem.cols()) {
    throw Error(ErrorCode::MismatchedLengths, "pinball_objective: coefficient length");
  }
  const Eigen::VectorXd resid = problem.response() - problem.features() * coef;
  double obj = 0.0;
  for (Eigen::Index i = 0; i < problem.rows(); ++i) {
    obj += problem.weight()[i] * check_loss(problem.tau()[i], resid[i]);
  }
  for (Eigen::Index j = 0; j < problem.penalty().size(); ++j) {
    obj += problem.penalty()[j] * std::abs(coef[j]);
  }
  return obj;
}

PinballSolution solve_pinball(const PinballProblem& problem,
                              const PinballSolveOptions& options)
{
  // Assemble the working rows: positive-weight rows plus penalty
  // pseudo-rows. Zero-weight rows cannot move the optimum.
  Eigen::Index kept = 0;
  for (Eigen::Index i = 0; i < problem.rows(); ++i) {
    if (problem.weight()[i] > 0.0) {
      ++kept;
    }
  }
  Eigen::MatrixXd x(kept, problem.cols());
  Eigen::VectorXd y(kept), tau(kept), w(kept);
  for (Eigen::Index i = 0, r = 0; i < problem.rows(); ++i) {
    if (problem.weight()[i] > 0.0) {
      x.row(r) = problem.features().row(i);
      y[r] = problem.response()[i];
      tau[r] = problem.tau()[i];
      w[r] = problem.weight()[i];
      ++r;
    }
  }
  if (problem.penalized()) {
    append_penalty_rows(problem, x, y, tau, w);
  }

  const Eigen::Index n = y.size();
  const Eigen::Index p = x.cols();

  // Bounded dual of the weighted quantile problem:
  //   min c'd  s.t.  A d = rhs,  0 <= d <= 1,
  // with A = (W X)', c = -W y, rhs = A (1 - tau). The multiplier of the
  // equality block converges to minus the regression coefficients.
  Eigen::MatrixXd a = (w.asDiagonal() * x).transpose();
  Eigen::VectorXd c = -(w.array() * y.array()).matrix();
  Eigen::VectorXd ones_minus_tau = (1.0 - tau.array()).matrix();
  Eigen::VectorXd rhs_eq = a * ones_minus_tau;

  Eigen::VectorXd xv = ones_minus_tau;  // primal LP variables, interior start
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);

  NormalSolver normal;
  normal.factorize(a, d);
  Eigen::VectorXd yv = normal.solve(a * c);
  Eigen::VectorXd s = c - a.transpose() * yv;

  const double eps = options.tol;
  Eigen::VectorXd z(n), wv(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pad = std::abs(s[i]) < eps ? eps : 0.0;
    z[i] = std::max(s[i], 0.0) + pad;
    wv[i] = std::max(-s[i], 0.0) + pad;
    s[i] = 1.0 - xv[i];
  }

  auto rel_gap = [&](double gap) {
    return gap / (1.0 + std::abs(c.dot(xv)));
  };

  double gap = z.dot(xv) + wv.dot(s);
  int it = 0;
  Eigen::VectorXd dx(n), ds(n), dz(n), dw(n), dr(n), rhs(p), dy(p), u(n);

  while (rel_gap(gap) > options.tol && it < options.max_iterations) {
    ++it;
    for (Eigen::Index i = 0; i < n; ++i) {
      d[i] = 1.0 / (z[i] / xv[i] + wv[i] / s[i]);
      ds[i] = z[i] - wv[i];
      dz[i] = d[i] * ds[i];
    }
    dy = rhs_eq - a * xv + a * dz;
    rhs = dy;
    normal.factorize(a, d);
    dy = normal.solve(dy);
    ds = a.transpose() * dy - ds;

    double deltap = kBig;
    double deltad = kBig;
    for (Eigen::Index i = 0; i < n; ++i) {
      dx[i] = d[i] * ds[i];
      ds[i] = -dx[i];
      dz[i] = -z[i] * (dx[i] / xv[i] + 1.0);
      dw[i] = -wv[i] * (ds[i] / s[i] + 1.0);
      if (dx[i] < 0.0) deltap = std::min(deltap, -xv[i] / dx[i]);
      if (ds[i] < 0.0) deltap = std::min(deltap, -s[i] / ds[i]);
      if (dz[i] < 0.0) deltad = std::min(deltad, -z[i] / dz[i]);
      if (dw[i] < 0.0) deltad = std::min(deltad, -wv[i] / dw[i]);
    }
    deltap = std::min(options.step_factor * deltap, 1.0);
    deltad = std::min(options.step_factor * deltad, 1.0);

    if (std::min(deltap, deltad) < 1.0) {
      // Mehrotra corrector: re-aim the step at a centered target.
      double mu = z.dot(xv) + wv.dot(s);
      double g = mu + deltap * dx.dot(z) + deltad * dz.dot(xv) +
                 deltap * deltad * dx.dot(dz) + deltap * ds.dot(wv) +
                 deltad * dw.dot(s) + deltap * deltad * ds.dot(dw);
      mu = mu * std::pow(g / mu, 3) / (2.0 * static_cast<double>(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        dr[i] = d[i] * (mu * (1.0 / s[i] - 1.0 / xv[i]) + dx[i] * dz[i] / xv[i] -
                        ds[i] * dw[i] / s[i]);
      }
      std::swap(rhs, dy);
      dy += a * dr;
      dy = normal.solve(dy);
      u = a.transpose() * dy;
      deltap = kBig;
      deltad = kBig;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double dxdz = dx[i] * dz[i];
        const double dsdw = ds[i] * dw[i];
        dx[i] = d[i] * (u[i] - z[i] + wv[i]) - dr[i];
        ds[i] = -dx[i];
        dz[i] = -z[i] + (mu - z[i] * dx[i] - dxdz) / xv[i];
        dw[i] = -wv[i] + (mu - wv[i] * ds[i] - dsdw) / s[i];
        if (dx[i] < 0.0) deltap = std::min(deltap, -xv[i] / dx[i]);
        if (ds[i] < 0.0) deltap = std::min(deltap, -s[i] / ds[i]);
        if (dz[i] < 0.0) deltad = std::min(deltad, -z[i] / dz[i]);
        if (dw[i] < 0.0) deltad = std::min(deltad, -wv[i] / dw[i]);
      }
      deltap = std::min(options.step_factor * deltap, 1.0);
      deltad = std::min(options.step_factor * deltad, 1.0);
    }

    xv += deltap * dx;
    s += deltap * ds;
    yv += deltad * dy;
    z += deltad * dz;
    wv += deltad * dw;
    gap = z.dot(xv) + wv.dot(s);
  }

  PinballSolution sol;
  sol.coefficients = -yv;
  sol.iterations = it;
  sol.duality_gap = rel_gap(gap);
  sol.objective = pinball_objective(problem, sol.coefficients);
  if (rel_gap(gap) > options.tol) {
    sol.status = SolveStatus::MaxIterations;
  } else if (flat_optimal_face(x, y, sol.coefficients)) {
    sol.status = SolveStatus::Degenerate;
  } else {
    sol.status = SolveStatus::Optimal;
  }
  return sol;
}

} // namespace vcqr
