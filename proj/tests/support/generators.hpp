#pragma once

// Seeded generators for property-style tests.

#include <random>

#include <vcqr/efficiency.hpp>
#include <vcqr/model.hpp>
#include <vcqr/pinball.hpp>

namespace vcqr::testing {

inline PinballProblem random_pinball(std::mt19937_64& rng, int p, int rows,
                                     bool with_intercept = true)
{
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Eigen::MatrixXd x(rows, p);
  Eigen::VectorXd y(rows), tau(rows), w(rows);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < p; ++j) {
      x(i, j) = (with_intercept && j == 0) ? 1.0 : sample_standard_normal(rng);
    }
    y[i] = 3.0 * sample_standard_normal(rng);
    tau[i] = 0.1 + 0.8 * unif(rng);
    w[i] = 0.2 + 1.8 * unif(rng);
  }
  return {std::move(x), std::move(y), std::move(tau), std::move(w)};
}

//! Dataset whose baseline and coefficient curves are linear in u, so local
//! linear stages reproduce them exactly on noiseless draws.
inline Dataset linear_dataset(std::mt19937_64& rng, int n, int d1, int d2,
                              double noise = 0.0, bool include_baseline = true)
{
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, d1), z(n, d2);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    for (int j = 0; j < d1; ++j) {
      x(i, j) = sample_standard_normal(rng);
    }
    for (int j = 0; j < d2; ++j) {
      z(i, j) = sample_standard_normal(rng);
    }
    double signal = include_baseline ? 0.5 + u[i] : 0.0;
    for (int j = 0; j < d1; ++j) {
      signal += (2.0 - (1.0 + 0.5 * j) * u[i]) * x(i, j);
    }
    for (int j = 0; j < d2; ++j) {
      signal += (1.0 + 0.5 * j) * z(i, j);
    }
    y[i] = signal + noise * sample_standard_normal(rng);
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y), include_baseline};
}

//! Smooth-curve dataset with a baseline; optional noise scale.
inline Dataset random_dataset(std::mt19937_64& rng, int n, int d1, int d2,
                              double noise = 0.5, bool include_baseline = true)
{
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, d1), z(n, d2);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    for (int j = 0; j < d1; ++j) {
      x(i, j) = sample_standard_normal(rng);
    }
    for (int j = 0; j < d2; ++j) {
      z(i, j) = sample_standard_normal(rng);
    }
    double signal = include_baseline ? std::sin(2.0 * M_PI * u[i]) : 0.0;
    for (int j = 0; j < d1; ++j) {
      signal += std::cos((j + 1) * M_PI * u[i]) * x(i, j);
    }
    for (int j = 0; j < d2; ++j) {
      signal += (1.0 + 0.5 * j) * z(i, j);
    }
    y[i] = signal + noise * sample_standard_normal(rng);
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y), include_baseline};
}

} // namespace vcqr::testing
