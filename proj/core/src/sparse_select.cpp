#include "vcqr/sparse_select.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "three_stage.hpp"

namespace vcqr {

namespace {

constexpr double kLossFloor = 1e-12;

double bic_value(double loss, int df, Eigen::Index n, bool* clamped)
{
  double l = loss;
  if (l < kLossFloor) {
    l = kLossFloor;
    if (clamped != nullptr) {
      *clamped = true;
    }
  }
  return std::log(l) + std::log(static_cast<double>(n)) / static_cast<double>(n) * df;
}

//! Sub-problem restricted to a support set; empty support means the zero
//! vector.
Eigen::VectorXd solve_restricted(const PinballProblem& penalized,
                                 const std::vector<Eigen::Index>& support,
                                 const PinballSolveOptions& solver)
{
  const Eigen::Index p = penalized.cols();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  if (support.empty()) {
    return beta;
  }
  const Eigen::Index ps = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd feats(penalized.rows(), ps);
  Eigen::VectorXd pen(ps);
  for (Eigen::Index c = 0; c < ps; ++c) {
    feats.col(c) = penalized.features().col(support[static_cast<std::size_t>(c)]);
    pen[c] = penalized.penalty().size() > 0
      ? penalized.penalty()[support[static_cast<std::size_t>(c)]]
      : 0.0;
  }
  PinballProblem sub(std::move(feats), penalized.response(), penalized.tau(),
                     penalized.weight());
  if (pen.maxCoeff() > 0.0) {
    sub.set_penalty(pen);
  }
  const PinballSolution sol = solve_pinball(sub, solver);
  for (Eigen::Index c = 0; c < ps; ++c) {
    beta[support[static_cast<std::size_t>(c)]] = sol.coefficients[c];
  }
  return beta;
}

//! Replaces near-zero penalized coordinates with exact zeros, re-solving on
//! the remaining support and keeping the result only when the penalized
//! objective is preserved. Falls back coordinate by coordinate.
void polish_zeros(const PinballProblem& penalized, const PinballSolveOptions& solver,
                  Eigen::VectorXd& beta)
{
  const Eigen::Index p = penalized.cols();
  const double scale = std::max(1.0, beta.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> zero_set;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (penalized.penalty()[j] > 0.0 && std::abs(beta[j]) < 1e-6 * scale) {
      zero_set.push_back(j);
    }
  }
  const double full_obj = pinball_objective(penalized, beta);
  while (!zero_set.empty()) {
    std::vector<Eigen::Index> support;
    for (Eigen::Index j = 0; j < p; ++j) {
      if (std::find(zero_set.begin(), zero_set.end(), j) == zero_set.end()) {
        support.push_back(j);
      }
    }
    Eigen::VectorXd candidate = solve_restricted(penalized, support, solver);
    const double obj = pinball_objective(penalized, candidate);
    if (obj <= full_obj + 1e-7 * (1.0 + std::abs(full_obj))) {
      beta = candidate;
      return;
    }
    // zeroing too much: release the largest candidate and retry
    auto widest = std::max_element(zero_set.begin(), zero_set.end(),
                                   [&](Eigen::Index a, Eigen::Index b) {
                                     return std::abs(beta[a]) < std::abs(beta[b]);
                                   });
    zero_set.erase(widest);
  }
}

SelectionResult finish_result(Eigen::VectorXd beta, double lambda, double loss,
                              Eigen::Index n, SolveStatus status)
{
  SelectionResult res;
  res.beta = std::move(beta);
  for (Eigen::Index j = 0; j < res.beta.size(); ++j) {
    if (res.beta[j] != 0.0) {
      res.selected.push_back(j);
    }
  }
  res.df = static_cast<int>(res.selected.size());
  res.lambda = lambda;
  res.loss = loss;
  res.bic = bic_value(loss, res.df, n, &res.loss_clamped);
  res.status = status;
  return res;
}

//! Shared one-step machinery for the check-loss estimators.
SelectionResult one_step_check_loss(const Dataset& data, const CurveSet& curves,
                                    const Eigen::VectorXd& beta0,
                                    const Eigen::VectorXd& levels, double factor,
                                    double lambda, const SparseOptions& options)
{
  PenaltySpec{options.scad_a, lambda}.validate();
  if (beta0.size() != data.d2()) {
    throw Error(ErrorCode::MismatchedLengths, "one-step: beta0 length != d2");
  }
  PinballProblem base = detail::build_refine_problem(data, curves, levels);

  Eigen::VectorXd penalty(data.d2());
  for (Eigen::Index j = 0; j < penalty.size(); ++j) {
    penalty[j] = factor * scad_derivative(std::abs(beta0[j]), lambda, options.scad_a);
  }

  Eigen::VectorXd beta;
  SolveStatus status;
  if (penalty.maxCoeff() <= 0.0) {
    const PinballSolution sol = solve_pinball(base, options.solver);
    beta = sol.coefficients;
    status = sol.status;
  } else {
    PinballProblem penalized = base;
    penalized.set_penalty(penalty);
    const PinballSolution sol = solve_pinball(penalized, options.solver);
    beta = sol.coefficients;
    status = sol.status;
    polish_zeros(penalized, options.solver, beta);
  }
  const double loss = pinball_objective(base, beta);
  return finish_result(std::move(beta), lambda, loss, data.n(), status);
}

//! Partial residuals for the squared-loss stage.
Eigen::VectorXd ls_partial_residuals(const Dataset& data, const CurveSet& curves)
{
  if (curves.grid.size() != data.n() || curves.alpha0_k.cols() != data.n()) {
    throw Error(ErrorCode::GridMismatch,
                "one-step LS: curves must be stored at the observation points");
  }
  Eigen::VectorXd r = data.y - curves.alpha0_k.row(0).transpose();
  if (data.d1() > 0) {
    r -= (data.x.array() * curves.alpha.transpose().array()).rowwise().sum().matrix();
  }
  return r;
}

} // namespace

double scad_derivative(double b, double lambda, double a)
{
  if (b < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "scad_derivative: magnitude must be >= 0");
  }
  PenaltySpec{a, lambda}.validate();
  if (b <= lambda) {
    return lambda;
  }
  return std::max(a * lambda - b, 0.0) / (a - 1.0);
}

SelectionResult one_step_sparse_cqr(const Dataset& data, const CurveSet& stage1_curves,
                                    const Eigen::VectorXd& beta0,
                                    const QuantileGrid& qgrid, double lambda,
                                    const SparseOptions& options)
{
  const double factor = static_cast<double>(data.n()) * qgrid.q;
  return one_step_check_loss(data, stage1_curves, beta0, qgrid.taus, factor, lambda,
                             options);
}

SelectionResult one_step_sparse_qr(const Dataset& data, const CurveSet& stage1_curves,
                                   const Eigen::VectorXd& beta0, double tau,
                                   double lambda, const SparseOptions& options)
{
  return one_step_check_loss(data, stage1_curves, beta0,
                             Eigen::VectorXd::Constant(1, tau),
                             static_cast<double>(data.n()), lambda, options);
}

//! Working quantities of the squared-loss one-step problem.
struct LsWork {
  Eigen::VectorXd r;
  Eigen::MatrixXd gram;
  Eigen::VectorXd zr;
};

//! Cyclic soft-threshold coordinate descent; when `support` is given, the
//! complement stays pinned at zero.
Eigen::VectorXd ls_coordinate_descent(const LsWork& work, const Eigen::VectorXd& thresh,
                                      Eigen::VectorXd beta,
                                      const std::vector<Eigen::Index>* support,
                                      const SparseOptions& options, SolveStatus* status)
{
  const Eigen::Index p = thresh.size();
  std::vector<Eigen::Index> active;
  if (support != nullptr) {
    active = *support;
    beta.setZero();
  } else {
    active.resize(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
      active[static_cast<std::size_t>(j)] = j;
    }
  }
  *status = SolveStatus::MaxIterations;
  for (int sweep = 0; sweep < options.ls_max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j : active) {
      if (work.gram(j, j) <= 0.0) {
        beta[j] = 0.0;
        continue;
      }
      const double rho = work.zr[j] - work.gram.row(j).dot(beta) +
                         work.gram(j, j) * beta[j];
      double bj = 0.0;
      if (rho > thresh[j]) {
        bj = (rho - thresh[j]) / work.gram(j, j);
      } else if (rho < -thresh[j]) {
        bj = (rho + thresh[j]) / work.gram(j, j);
      }
      max_change = std::max(max_change, std::abs(bj - beta[j]));
      beta[j] = bj;
    }
    if (max_change <= options.ls_tol * (1.0 + beta.cwiseAbs().maxCoeff())) {
      *status = SolveStatus::Optimal;
      break;
    }
  }
  return beta;
}

LsWork ls_workspace(const Dataset& data, const CurveSet& stage1_curves)
{
  LsWork work;
  work.r = ls_partial_residuals(data, stage1_curves);
  work.gram = data.z.transpose() * data.z;
  work.zr = data.z.transpose() * work.r;
  return work;
}

Eigen::VectorXd ls_thresholds(const Dataset& data, const Eigen::VectorXd& beta0,
                              double lambda, double a)
{
  Eigen::VectorXd thresh(data.d2());
  for (Eigen::Index j = 0; j < thresh.size(); ++j) {
    thresh[j] = static_cast<double>(data.n()) *
                scad_derivative(std::abs(beta0[j]), lambda, a);
  }
  return thresh;
}

double ls_penalized_objective(const Dataset& data, const LsWork& work,
                              const Eigen::VectorXd& thresh, const Eigen::VectorXd& beta)
{
  return 0.5 * (work.r - data.z * beta).squaredNorm() +
         thresh.dot(beta.cwiseAbs());
}

SelectionResult one_step_sparse_ls(const Dataset& data, const CurveSet& stage1_curves,
                                   const Eigen::VectorXd& beta0, double lambda,
                                   const SparseOptions& options)
{
  PenaltySpec{options.scad_a, lambda}.validate();
  if (beta0.size() != data.d2()) {
    throw Error(ErrorCode::MismatchedLengths, "one-step LS: beta0 length != d2");
  }
  const LsWork work = ls_workspace(data, stage1_curves);
  const Eigen::VectorXd thresh = ls_thresholds(data, beta0, lambda, options.scad_a);
  SolveStatus status;
  Eigen::VectorXd beta =
    ls_coordinate_descent(work, thresh, beta0, nullptr, options, &status);
  const double loss = (work.r - data.z * beta).squaredNorm();
  return finish_result(std::move(beta), lambda, loss, data.n(), status);
}

Eigen::VectorXd default_lambda_grid(const Dataset& data, const Eigen::VectorXd& beta0,
                                    int q, int points)
{
  if (points < 1 || q < 1) {
    throw Error(ErrorCode::InvalidArgument, "default_lambda_grid: bad arguments");
  }
  double lam_max = 0.0;
  for (Eigen::Index j = 0; j < data.d2(); ++j) {
    const double mean_abs = data.z.col(j).cwiseAbs().mean();
    const double pilot = j < beta0.size() ? std::abs(beta0[j]) : 0.0;
    lam_max = std::max({lam_max, mean_abs, pilot});
  }
  if (lam_max <= 0.0) {
    lam_max = 1.0;
  }
  Eigen::VectorXd grid(points);
  if (points == 1) {
    grid[0] = lam_max;
    return grid;
  }
  const double lo = std::log(lam_max / 1e3);
  const double hi = std::log(lam_max);
  for (int i = 0; i < points; ++i) {
    grid[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / (points - 1));
  }
  return grid;
}

namespace {

//! Shared BIC path: ascending lambdas, df ties resolved toward the sparser
//! support seen at the previous (smaller) lambda, final ties toward the
//! larger lambda.
template <typename Solve1, typename Restrict>
SelectionResult bic_path(const Eigen::VectorXd& lambda_grid, Eigen::Index n,
                         Solve1&& solve_at, Restrict&& restrict_at)
{
  if (lambda_grid.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "bic_select: empty lambda grid");
  }
  Eigen::VectorXd lambdas = lambda_grid;
  std::sort(lambdas.data(), lambdas.data() + lambdas.size());

  std::vector<SelectionResult> results;
  results.reserve(static_cast<std::size_t>(lambdas.size()));
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    SelectionResult res = solve_at(lambdas[i]);
    if (!results.empty() && res.df > results.back().df) {
      // LP-degeneracy tie: keep the sparser support when it costs nothing
      std::optional<SelectionResult> sparser =
        restrict_at(lambdas[i], results.back().selected, res);
      if (sparser.has_value()) {
        res = std::move(*sparser);
      }
    }
    results.push_back(std::move(res));
  }

  SelectionResult best;
  bool have_best = false;
  std::vector<PathRecord> path;
  path.reserve(results.size());
  for (auto& res : results) {
    path.push_back({res.lambda, res.df, res.loss, res.bic});
    if (!have_best || res.bic <= best.bic) {
      best = res;
      have_best = true;
    }
  }
  (void)n;
  best.path = std::move(path);
  return best;
}

} // namespace

SelectionResult bic_select(const Dataset& data, const CurveSet& stage1_curves,
                           const Eigen::VectorXd& beta0, const QuantileGrid& qgrid,
                           const Eigen::VectorXd& lambda_grid,
                           const SparseOptions& options)
{
  PinballProblem base = detail::build_refine_problem(data, stage1_curves, qgrid.taus);
  const double factor = static_cast<double>(data.n()) * qgrid.q;

  auto penalized_at = [&](double lambda) {
    Eigen::VectorXd penalty(data.d2());
    for (Eigen::Index j = 0; j < penalty.size(); ++j) {
      penalty[j] = factor * scad_derivative(std::abs(beta0[j]), lambda, options.scad_a);
    }
    PinballProblem prob = base;
    if (penalty.maxCoeff() > 0.0) {
      prob.set_penalty(penalty);
    }
    return prob;
  };

  auto solve_at = [&](double lambda) {
    PinballProblem prob = penalized_at(lambda);
    const PinballSolution sol = solve_pinball(prob, options.solver);
    Eigen::VectorXd beta = sol.coefficients;
    if (prob.penalized()) {
      polish_zeros(prob, options.solver, beta);
    }
    const double loss = pinball_objective(base, beta);
    return finish_result(std::move(beta), lambda, loss, data.n(), sol.status);
  };

  auto restrict_at = [&](double lambda, const std::vector<Eigen::Index>& support,
                         const SelectionResult& dense) -> std::optional<SelectionResult> {
    PinballProblem prob = penalized_at(lambda);
    Eigen::VectorXd candidate = solve_restricted(prob, support, options.solver);
    const double dense_obj = pinball_objective(prob, dense.beta);
    const double cand_obj = pinball_objective(prob, candidate);
    if (cand_obj <= dense_obj + 1e-7 * (1.0 + std::abs(dense_obj))) {
      const double loss = pinball_objective(base, candidate);
      return finish_result(std::move(candidate), lambda, loss, data.n(), dense.status);
    }
    return std::nullopt;
  };

  return bic_path(lambda_grid, data.n(), solve_at, restrict_at);
}

SelectionResult bic_select_qr(const Dataset& data, const CurveSet& stage1_curves,
                              const Eigen::VectorXd& beta0, double tau,
                              const Eigen::VectorXd& lambda_grid,
                              const SparseOptions& options)
{
  auto solve_at = [&](double lambda) {
    return one_step_sparse_qr(data, stage1_curves, beta0, tau, lambda, options);
  };
  auto restrict_at = [&](double, const std::vector<Eigen::Index>&,
                         const SelectionResult&) -> std::optional<SelectionResult> {
    return std::nullopt;
  };
  return bic_path(lambda_grid, data.n(), solve_at, restrict_at);
}

SelectionResult bic_select_ls(const Dataset& data, const CurveSet& stage1_curves,
                              const Eigen::VectorXd& beta0,
                              const Eigen::VectorXd& lambda_grid,
                              const SparseOptions& options)
{
  const LsWork work = ls_workspace(data, stage1_curves);

  auto solve_at = [&](double lambda) {
    const Eigen::VectorXd thresh = ls_thresholds(data, beta0, lambda, options.scad_a);
    SolveStatus status;
    Eigen::VectorXd beta =
      ls_coordinate_descent(work, thresh, beta0, nullptr, options, &status);
    const double loss = (work.r - data.z * beta).squaredNorm();
    return finish_result(std::move(beta), lambda, loss, data.n(), status);
  };

  auto restrict_at = [&](double lambda, const std::vector<Eigen::Index>& support,
                         const SelectionResult& dense) -> std::optional<SelectionResult> {
    const Eigen::VectorXd thresh = ls_thresholds(data, beta0, lambda, options.scad_a);
    SolveStatus status;
    Eigen::VectorXd candidate =
      ls_coordinate_descent(work, thresh, beta0, &support, options, &status);
    const double dense_obj = ls_penalized_objective(data, work, thresh, dense.beta);
    const double cand_obj = ls_penalized_objective(data, work, thresh, candidate);
    if (cand_obj <= dense_obj + 1e-7 * (1.0 + std::abs(dense_obj))) {
      const double loss = (work.r - data.z * candidate).squaredNorm();
      return finish_result(std::move(candidate), lambda, loss, data.n(), status);
    }
    return std::nullopt;
  };

  return bic_path(lambda_grid, data.n(), solve_at, restrict_at);
}

} // namespace vcqr
