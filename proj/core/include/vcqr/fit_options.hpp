#pragma once

#include <Eigen/Dense>

#include "vcqr/pinball.hpp"

namespace vcqr {

//! Knobs shared by the three-stage estimators.
struct FitOptions {
  int threads = 1;  //!< parallelism degree for the local-fit loops
  PinballSolveOptions solver{};
};

//! Result of a stage-2 root-n refinement.
struct BetaRefinement {
  Eigen::VectorXd beta;
  double objective = 0.0;
  SolveStatus status = SolveStatus::Optimal;
};

} // namespace vcqr
