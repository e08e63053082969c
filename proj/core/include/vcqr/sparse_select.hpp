#pragma once

#include <vector>

#include <Eigen/Dense>

#include "vcqr/fit_options.hpp"
#include "vcqr/model.hpp"
#include "vcqr/pinball.hpp"

namespace vcqr {

//! SCAD penalty parameters.
struct PenaltySpec {
  double a = 3.7;
  double lambda = 0.0;

  void validate() const
  {
    if (!(a > 2.0)) {
      throw Error(ErrorCode::InvalidArgument, "PenaltySpec: a must exceed 2");
    }
    if (!(lambda >= 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "PenaltySpec: lambda must be >= 0");
    }
  }
};

//! p'_lambda(b) = lambda for b <= lambda, (a lambda - b)_+ / (a - 1) above.
double scad_derivative(double b, double lambda, double a = 3.7);

struct PathRecord {
  double lambda = 0.0;
  int df = 0;
  double loss = 0.0;
  double bic = 0.0;
};

struct SelectionResult {
  Eigen::VectorXd beta;                 //!< exact zeros off the support
  std::vector<Eigen::Index> selected;   //!< indices of nonzero coefficients
  int df = 0;
  double bic = 0.0;
  double loss = 0.0;                    //!< residual loss entering the BIC
  double lambda = 0.0;
  std::vector<PathRecord> path;         //!< ascending lambda
  bool loss_clamped = false;
  SolveStatus status = SolveStatus::Optimal;
};

struct SparseOptions {
  double scad_a = 3.7;
  PinballSolveOptions solver{};
  int threads = 1;
  int ls_max_sweeps = 10000;
  double ls_tol = 1e-10;
};

//! One-step sparse estimators: weighted-L1 refits of the stage-2 problem
//! with SCAD-derivative weights built from the unpenalized pilot beta0.
//! The stage-1 curves must be stored at the observation points.
SelectionResult one_step_sparse_cqr(const Dataset& data, const CurveSet& stage1_curves,
                                    const Eigen::VectorXd& beta0,
                                    const QuantileGrid& qgrid, double lambda,
                                    const SparseOptions& options = {});

SelectionResult one_step_sparse_qr(const Dataset& data, const CurveSet& stage1_curves,
                                   const Eigen::VectorXd& beta0, double tau,
                                   double lambda, const SparseOptions& options = {});

//! Squared-loss analogue, solved by coordinate descent.
SelectionResult one_step_sparse_ls(const Dataset& data, const CurveSet& stage1_curves,
                                   const Eigen::VectorXd& beta0, double lambda,
                                   const SparseOptions& options = {});

//! 50 log-spaced values from the smallest all-zeroing lambda down three
//! decades.
Eigen::VectorXd default_lambda_grid(const Dataset& data, const Eigen::VectorXd& beta0,
                                    int q, int points = 50);

//! Evaluates every lambda and returns the BIC minimizer; ties go to the
//! larger (sparser) lambda. The losses reuse the stage-1 curves that enter
//! the one-step objective.
SelectionResult bic_select(const Dataset& data, const CurveSet& stage1_curves,
                           const Eigen::VectorXd& beta0, const QuantileGrid& qgrid,
                           const Eigen::VectorXd& lambda_grid,
                           const SparseOptions& options = {});

SelectionResult bic_select_qr(const Dataset& data, const CurveSet& stage1_curves,
                              const Eigen::VectorXd& beta0, double tau,
                              const Eigen::VectorXd& lambda_grid,
                              const SparseOptions& options = {});

SelectionResult bic_select_ls(const Dataset& data, const CurveSet& stage1_curves,
                              const Eigen::VectorXd& beta0,
                              const Eigen::VectorXd& lambda_grid,
                              const SparseOptions& options = {});

} // namespace vcqr
