#pragma once

#include <Eigen/Dense>

#include "vcqr/errors.hpp"

namespace vcqr {

enum class KernelKind { Epanechnikov, Uniform, Triangular };

//! A symmetric density kernel with support (-1, 1).
struct KernelSpec {
  KernelKind kind = KernelKind::Epanechnikov;

  static KernelSpec epanechnikov() { return {KernelKind::Epanechnikov}; }
  static KernelSpec uniform() { return {KernelKind::Uniform}; }
  static KernelSpec triangular() { return {KernelKind::Triangular}; }
};

//! K(t); exactly zero for |t| >= 1.
double kernel_weight(const KernelSpec& spec, double t);

//! Closed-form kernel constants (mu2, nu0) = (int t^2 K, int K^2).
struct KernelMoments {
  double mu2 = 0.0;
  double nu0 = 0.0;
};
KernelMoments kernel_moments(const KernelSpec& spec);

//! Local weights w_i = K((u_i - u0)/h) / h.
//!
//! When min_nonzero > 0, fewer than that many strictly positive weights
//! raises an insufficient-local-data error (the local problem would be
//! underdetermined).
Eigen::VectorXd local_weights(const KernelSpec& spec, const Eigen::VectorXd& u,
                              double u0, double h, Eigen::Index min_nonzero = 0);

} // namespace vcqr
