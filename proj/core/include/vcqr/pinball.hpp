#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vcqr/errors.hpp"

namespace vcqr {

//! One term of a weighted composite check-loss objective.
struct PinballRow {
  Eigen::VectorXd features;
  double response = 0.0;
  double tau = 0.5;
  double weight = 1.0;
};

//! Weighted composite check-loss minimization
//!   min_b  sum_i w_i rho_{tau_i}(y_i - x_i'b) + sum_j penalty_j |b_j|,
//! with per-row quantile levels and nonnegative weights. An empty penalty
//! vector means no penalized coordinates.
class PinballProblem {
public:
  PinballProblem(Eigen::MatrixXd features, Eigen::VectorXd response,
                 Eigen::VectorXd tau, Eigen::VectorXd weight);

  //! Uniform level and unit weights.
  PinballProblem(Eigen::MatrixXd features, Eigen::VectorXd response, double tau);

  static PinballProblem from_rows(const std::vector<PinballRow>& rows);

  void set_penalty(Eigen::VectorXd penalty);

  Eigen::Index rows() const { return response_.size(); }
  Eigen::Index cols() const { return features_.cols(); }
  const Eigen::MatrixXd& features() const { return features_; }
  const Eigen::VectorXd& response() const { return response_; }
  const Eigen::VectorXd& tau() const { return tau_; }
  const Eigen::VectorXd& weight() const { return weight_; }
  const Eigen::VectorXd& penalty() const { return penalty_; }
  bool penalized() const { return penalty_.size() > 0 && penalty_.maxCoeff() > 0.0; }

  PinballRow row(Eigen::Index i) const;

private:
  Eigen::MatrixXd features_;
  Eigen::VectorXd response_;
  Eigen::VectorXd tau_;
  Eigen::VectorXd weight_;
  Eigen::VectorXd penalty_;
};

enum class SolveStatus { Optimal, MaxIterations, Degenerate };

struct PinballSolution {
  Eigen::VectorXd coefficients;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  double duality_gap = 0.0;  //!< relative complementarity gap at exit
};

struct PinballSolveOptions {
  double tol = 1e-8;          //!< relative duality-gap tolerance
  int max_iterations = 200;
  double step_factor = 0.99995;
};

//! rho_tau(r) = r (tau - 1(r < 0)).
inline double check_loss(double tau, double r)
{
  return r >= 0.0 ? tau * r : (tau - 1.0) * r;
}

//! Objective of `problem` at `coef`, penalty included.
double pinball_objective(const PinballProblem& problem, const Eigen::VectorXd& coef);

//! Minimizes the problem with a bounded-dual primal-dual interior-point
//! scheme (Frisch-Newton with Mehrotra correction).
PinballSolution solve_pinball(const PinballProblem& problem,
                              const PinballSolveOptions& options = {});

} // namespace vcqr
