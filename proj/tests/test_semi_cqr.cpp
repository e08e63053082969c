#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <vcqr/efficiency.hpp>
#include <vcqr/semi_cqr.hpp>
#include <vcqr/semi_qr.hpp>

#include "support/generators.hpp"
#include "support/pinball_oracle.hpp"

using namespace vcqr;

namespace {

const KernelSpec kKernel = KernelSpec::epanechnikov();

} // namespace

TEST_CASE("q = 1 reduces to the single-level estimator")
{
  std::mt19937_64 rng(21);
  const Dataset data = vcqr::testing::random_dataset(rng, 90, 1, 2, 0.5);
  const Eigen::VectorXd grid = uniform_grid(0.1, 0.9, 15);
  const SemiFit qr = fit_semi_qr(data, 0.5, 0.25, 0.25, kKernel, grid);
  const SemiFit cqr = fit_semi_cqr(data, QuantileGrid(1), 0.25, 0.25, kKernel, grid);
  CHECK(cqr.objectives.stage1 == doctest::Approx(qr.objectives.stage1).epsilon(1e-10));
  CHECK(cqr.objectives.stage2 == doctest::Approx(qr.objectives.stage2).epsilon(1e-10));
  CHECK(cqr.objectives.stage3 == doctest::Approx(qr.objectives.stage3).epsilon(1e-10));
  CHECK((cqr.beta - qr.beta).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("constant symmetric data pins every level intercept")
{
  std::mt19937_64 rng(22);
  const int n = 40;
  Eigen::VectorXd u(n), y = Eigen::VectorXd::Constant(n, 3.0);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
  }
  const Dataset data(u, x, z, y, true);
  const LocalCqrFit fit = stage1_local_cqr(data, 0.5, QuantileGrid(3), 0.6, kKernel);
  for (int k = 0; k < 3; ++k) {
    CHECK(fit.intercepts[k] == doctest::Approx(3.0).epsilon(1e-6));
  }
  CHECK(fit.baseline() == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("composite local fit matches the extended enumeration oracle")
{
  // the level intercepts stay in the design without a baseline, so a
  // q = 2, d2 = 1 instance keeps the oracle within its p <= 3 budget
  std::mt19937_64 rng(23);
  const int n = 12;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
    y[i] = z(i, 0) + 0.4 * sample_standard_normal(rng);
  }
  const Dataset data(u, x, z, y, false);
  const QuantileGrid qgrid(2);
  const double u0 = 0.5, h = 1.0;
  const LocalCqrFit fit = stage1_local_cqr(data, u0, qgrid, h, kKernel);

  // shared design [e_1, e_2, z] replicated per level
  std::vector<PinballRow> rows;
  for (int k = 0; k < 2; ++k) {
    for (int i = 0; i < n; ++i) {
      const double w = kernel_weight(kKernel, (u[i] - u0) / h) / h;
      if (w <= 0.0) {
        continue;
      }
      Eigen::VectorXd f(3);
      f << (k == 0 ? 1.0 : 0.0), (k == 1 ? 1.0 : 0.0), z(i, 0);
      rows.push_back({f, y[i], qgrid.taus[k], w});
    }
  }
  const PinballSolution oracle =
    vcqr::testing::brute_force_oracle_extended(PinballProblem::from_rows(rows));
  CHECK(fit.objective <= oracle.objective + 1e-6 * (1.0 + oracle.objective));
  CHECK(fit.objective >= oracle.objective - 1e-9 * (1.0 + oracle.objective));
}

TEST_CASE("level intercepts track the error quantiles")
{
  std::mt19937_64 rng(24);
  const int n = 400;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  const ErrorDist dist = ErrorDist::normal();
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
    y[i] = 0.5 * z(i, 0) + dist.sample(rng);
  }
  const Dataset data(u, x, z, y, true);
  const QuantileGrid qgrid(5);
  const LocalCqrFit fit = stage1_local_cqr(data, 0.5, qgrid, 0.45, kKernel);
  for (int k = 0; k < 5; ++k) {
    CHECK(std::abs(fit.intercepts[k] - dist.quantile(qgrid.taus[k])) < 0.35);
  }
  // sorted on a well-conditioned window
  for (int k = 1; k < 5; ++k) {
    CHECK(fit.intercepts[k] >= fit.intercepts[k - 1]);
  }
}

TEST_CASE("stage 2 composite refinement is exact on noiseless data")
{
  std::mt19937_64 rng(25);
  const Dataset data = vcqr::testing::linear_dataset(rng, 100, 1, 2, 0.0);
  const Eigen::VectorXd grid = uniform_grid(0.15, 0.85, 15);
  const SemiFit fit = fit_semi_cqr(data, QuantileGrid(5), 0.2, 0.2, kKernel, grid);
  CHECK(fit.beta[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.beta[1] == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(fit.quantile_crossings == 0);
}

TEST_CASE("reported baseline averages the level intercepts")
{
  std::mt19937_64 rng(26);
  const Dataset data = vcqr::testing::random_dataset(rng, 80, 1, 1, 0.3);
  const Eigen::VectorXd grid = uniform_grid(0.2, 0.8, 9);
  const SemiFit fit = fit_semi_cqr(data, QuantileGrid(3), 0.3, 0.3, kKernel, grid);
  const Eigen::VectorXd base = fit.curves.baseline();
  for (Eigen::Index m = 0; m < grid.size(); ++m) {
    CHECK(base[m] == doctest::Approx(fit.curves.alpha0_k.col(m).mean()).epsilon(1e-12));
  }
}

TEST_CASE("symmetric error leaves the baseline unbiased")
{
  // the average of symmetric quantiles cancels, so the reported baseline
  // estimates the true curve
  const int reps = 12, n = 200;
  double bias = 0.0;
  for (int r = 0; r < reps; ++r) {
    std::mt19937_64 rng(900 + r);
    Eigen::VectorXd u(n), y(n);
    Eigen::MatrixXd x(n, 0), z(n, 1);
    const ErrorDist dist = ErrorDist::normal_mixture(0.9, 1.0, 3.0);
    for (int i = 0; i < n; ++i) {
      u[i] = uniform_open01(rng);
      z(i, 0) = sample_standard_normal(rng);
      y[i] = std::sin(2.0 * M_PI * u[i]) + 0.8 * z(i, 0) + dist.sample(rng);
    }
    const Dataset data(u, x, z, y, true);
    Eigen::VectorXd grid(1);
    grid << 0.5;
    const SemiFit fit = fit_semi_cqr(data, QuantileGrid(9), 0.25, 0.25, kKernel, grid);
    bias += fit.curves.baseline()[0] - std::sin(M_PI);
  }
  bias /= reps;
  CHECK(std::abs(bias) < 0.15);
}

TEST_CASE("location and scale equivariance at the objective level")
{
  std::mt19937_64 rng(27);
  const Dataset data = vcqr::testing::random_dataset(rng, 70, 1, 1, 0.4);
  const Eigen::VectorXd grid = uniform_grid(0.2, 0.8, 7);
  FitOptions opts;
  opts.solver.tol = 1e-11;
  const SemiFit base = fit_semi_cqr(data, QuantileGrid(3), 0.3, 0.3, kKernel, grid, opts);

  const double c = 5.5;
  Dataset shifted(data.u, data.x, data.z, (data.y.array() + c).matrix(),
                  data.include_baseline);
  const SemiFit shift_fit =
    fit_semi_cqr(shifted, QuantileGrid(3), 0.3, 0.3, kKernel, grid, opts);
  CHECK(shift_fit.objectives.stage1 ==
        doctest::Approx(base.objectives.stage1).epsilon(1e-8));
  CHECK((shift_fit.beta - base.beta).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(((shift_fit.curves.alpha0_k - base.curves.alpha0_k).array() - c)
          .abs()
          .maxCoeff() < 1e-5);

  const double s = 2.5;
  Dataset scaled(data.u, data.x, data.z, (data.y * s).eval(), data.include_baseline);
  const SemiFit scale_fit =
    fit_semi_cqr(scaled, QuantileGrid(3), 0.3, 0.3, kKernel, grid, opts);
  CHECK(scale_fit.objectives.stage1 ==
        doctest::Approx(s * base.objectives.stage1).epsilon(1e-8));
  CHECK((scale_fit.beta - s * base.beta).cwiseAbs().maxCoeff() < 1e-5);
}
