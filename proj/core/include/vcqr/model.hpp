#pragma once

#include <Eigen/Dense>

#include "vcqr/errors.hpp"

namespace vcqr {

//! One observation block (u, X, Z, y) for a varying-coefficient partially
//! linear model y = a0(u) + x'a(u) + z'beta + e.
//!
//! All rows share the index n; x may have zero columns (pure partially
//! linear model) and z may have zero columns, but not both.
struct Dataset {
  Eigen::VectorXd u;       //!< index variable, length n
  Eigen::MatrixXd x;       //!< n x d1 varying-coefficient covariates
  Eigen::MatrixXd z;       //!< n x d2 linear covariates
  Eigen::VectorXd y;       //!< response, length n
  bool include_baseline = true;  //!< whether a baseline curve a0(u) is in the model

  Dataset() = default;
  Dataset(Eigen::VectorXd u_, Eigen::MatrixXd x_, Eigen::MatrixXd z_,
          Eigen::VectorXd y_, bool include_baseline_ = true);

  Eigen::Index n() const { return y.size(); }
  Eigen::Index d1() const { return x.cols(); }
  Eigen::Index d2() const { return z.cols(); }
};

//! Equispaced quantile levels tau_k = k/(q+1), k = 1..q.
struct QuantileGrid {
  int q = 1;
  Eigen::VectorXd taus;

  explicit QuantileGrid(int q_);
};

enum class CurveMode { AtObservations, OnGrid };

//! Fitted coefficient curves evaluated on a common grid.
//!
//! alpha0_k holds one intercept curve per quantile level (the baseline
//! shifted by that level's error quantile); alpha holds the d1
//! varying-coefficient curves. Rows of either matrix may be all zero when
//! the corresponding block was not part of the fitted design.
struct CurveSet {
  Eigen::VectorXd grid;      //!< evaluation points, length G
  Eigen::MatrixXd alpha0_k;  //!< q x G intercept curves
  Eigen::MatrixXd alpha;     //!< d1 x G coefficient curves
  CurveMode mode = CurveMode::OnGrid;

  Eigen::Index size() const { return grid.size(); }
  Eigen::Index levels() const { return alpha0_k.rows(); }
  Eigen::Index d1() const { return alpha.rows(); }

  //! Average of the per-level intercept curves (the reported baseline).
  Eigen::VectorXd baseline() const;
};

//! Values of every stored curve at a single point: [alpha0_1..alpha0_q,
//! alpha_1..alpha_d1].
Eigen::VectorXd evaluate_curveset(const CurveSet& curves, double u0);

//! Objective values of the three estimation stages; stage 1 and 3 are
//! summed over local fits.
struct StageObjectives {
  double stage1 = 0.0;
  double stage2 = 0.0;
  double stage3 = 0.0;
};

enum class FitMethod { QR, CQR, LS };

//! A complete three-stage fit.
struct SemiFit {
  FitMethod method = FitMethod::CQR;
  int q = 1;                    //!< number of quantile levels (1 for QR/LS)
  double tau = 0.5;             //!< quantile level (QR only)
  double h_stage1 = 0.0;
  double h_stage3 = 0.0;
  Eigen::VectorXd beta;          //!< refined stage-2 coefficients
  Eigen::VectorXd initial_beta;  //!< average of the stage-1 local coefficients
  CurveSet stage1_curves;        //!< initial curves at the observation points
  CurveSet curves;               //!< refined curves on the output grid
  StageObjectives objectives;
  int quantile_crossings = 0;    //!< diagnostic: local intercept order violations

  void validate() const;
};

//! Uniformly spaced grid of `points` values covering [lo, hi].
Eigen::VectorXd uniform_grid(double lo, double hi, int points = 200);

//! Default stage-1 bandwidth: undersmooth the curve bandwidth by n^(-1/10).
double default_stage1_bandwidth(double h_stage3, Eigen::Index n);

} // namespace vcqr
