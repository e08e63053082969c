#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <vcqr/efficiency.hpp>
#include <vcqr/semi_qr.hpp>

#include "support/generators.hpp"
#include "support/pinball_oracle.hpp"

using namespace vcqr;

namespace {

const KernelSpec kKernel = KernelSpec::epanechnikov();

Dataset constant_response_data(int n, double value, std::mt19937_64& rng)
{
  Eigen::VectorXd u(n), y = Eigen::VectorXd::Constant(n, value);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y), true};
}

} // namespace

TEST_CASE("constant response gives a flat local fit")
{
  std::mt19937_64 rng(1);
  const Dataset data = constant_response_data(40, 5.0, rng);
  const LocalQrFit fit = stage1_local_qr(data, 0.5, 0.5, 0.6, kKernel);
  CHECK(fit.a0 == doctest::Approx(5.0).epsilon(1e-7));
  CHECK(std::abs(fit.b0) < 1e-6);
  CHECK(std::abs(fit.beta[0]) < 1e-6);
}

TEST_CASE("noiseless linear signal is recovered locally")
{
  std::mt19937_64 rng(2);
  const int n = 60;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
    y[i] = 2.0 * z(i, 0);
  }
  const Dataset data(u, x, z, y, true);
  const LocalQrFit fit = stage1_local_qr(data, 0.4, 0.5, 0.5, kKernel);
  CHECK(fit.beta[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("local fit matches the enumeration oracle")
{
  // small no-baseline window so the design has three columns
  std::mt19937_64 rng(3);
  const int n = 15;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 1), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    x(i, 0) = sample_standard_normal(rng);
    z(i, 0) = sample_standard_normal(rng);
    y[i] = std::sin(2.0 * u[i]) * x(i, 0) + 0.8 * z(i, 0) +
           0.3 * sample_standard_normal(rng);
  }
  const Dataset data(u, x, z, y, false);
  const double u0 = 0.5, h = 1.0, tau = 0.5;
  const LocalQrFit fit = stage1_local_qr(data, u0, tau, h, kKernel);

  // assemble the same problem independently: [x, x (u-u0), z]
  std::vector<PinballRow> rows;
  for (int i = 0; i < n; ++i) {
    const double w = kernel_weight(kKernel, (u[i] - u0) / h) / h;
    if (w <= 0.0) {
      continue;
    }
    Eigen::VectorXd f(3);
    f << x(i, 0), x(i, 0) * (u[i] - u0), z(i, 0);
    rows.push_back({f, y[i], tau, w});
  }
  const PinballSolution oracle =
    vcqr::testing::brute_force_oracle(PinballProblem::from_rows(rows));
  CHECK(fit.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("stage-2 recovers an exact linear residual structure")
{
  std::mt19937_64 rng(4);
  const int n = 30;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 0), z(n, 2);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
    z(i, 1) = sample_standard_normal(rng);
    y[i] = 1.5 * z(i, 0) - 0.5 * z(i, 1);
  }
  const Dataset data(u, x, z, y, true);
  CurveSet curves;
  curves.grid = u;
  curves.mode = CurveMode::AtObservations;
  curves.alpha0_k = Eigen::MatrixXd::Zero(1, n);
  curves.alpha = Eigen::MatrixXd::Zero(0, n);
  const BetaRefinement ref = stage2_refine_beta(data, curves, 0.5);
  CHECK(ref.beta[0] == doctest::Approx(1.5).epsilon(1e-7));
  CHECK(ref.beta[1] == doctest::Approx(-0.5).epsilon(1e-7));
}

TEST_CASE("stage-2 is invariant to a common shift of response and intercept curve")
{
  std::mt19937_64 rng(5);
  const Dataset data = vcqr::testing::random_dataset(rng, 50, 1, 2, 0.4);
  const SemiFit fit = fit_semi_qr(data, 0.5, 0.25, 0.25, kKernel,
                                  uniform_grid(0.05, 0.95, 20));

  Dataset shifted(data.u, data.x, data.z, (data.y.array() + 7.0).matrix(), true);
  CurveSet curves = fit.stage1_curves;
  curves.alpha0_k.array() += 7.0;
  const BetaRefinement a = stage2_refine_beta(data, fit.stage1_curves, 0.5);
  const BetaRefinement b = stage2_refine_beta(shifted, curves, 0.5);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-12));
}

TEST_CASE("stage-2 matches the oracle on a single-coefficient problem")
{
  std::mt19937_64 rng(6);
  const int n = 9;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 0), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    z(i, 0) = sample_standard_normal(rng);
    y[i] = 0.7 * z(i, 0) + 0.5 * sample_standard_normal(rng);
  }
  const Dataset data(u, x, z, y, true);
  CurveSet curves;
  curves.grid = u;
  curves.mode = CurveMode::AtObservations;
  curves.alpha0_k = Eigen::MatrixXd::Zero(1, n);
  curves.alpha = Eigen::MatrixXd::Zero(0, n);
  const BetaRefinement ref = stage2_refine_beta(data, curves, 0.3);

  std::vector<PinballRow> rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back({z.row(i).transpose(), y[i], 0.3, 1.0});
  }
  const PinballSolution oracle =
    vcqr::testing::brute_force_oracle(PinballProblem::from_rows(rows));
  CHECK(ref.objective == doctest::Approx(oracle.objective).epsilon(1e-6));
}

TEST_CASE("noiseless linear curves are reproduced on the grid")
{
  std::mt19937_64 rng(7);
  const int n = 80;
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 1), z(n, 1);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    x(i, 0) = sample_standard_normal(rng);
    z(i, 0) = sample_standard_normal(rng);
    // baseline 1 + 2u, coefficient curve 3 - u, beta 1.5; all locally linear
    y[i] = (1.0 + 2.0 * u[i]) + (3.0 - u[i]) * x(i, 0) + 1.5 * z(i, 0);
  }
  const Dataset data(u, x, z, y, true);
  const Eigen::VectorXd grid = uniform_grid(0.2, 0.8, 15);
  Eigen::VectorXd beta(1);
  beta << 1.5;
  const CurveSet curves = stage3_refine_curves(data, beta, 0.5, 0.3, kKernel, grid);
  for (Eigen::Index m = 0; m < grid.size(); ++m) {
    CHECK(curves.alpha0_k(0, m) == doctest::Approx(1.0 + 2.0 * grid[m]).epsilon(1e-4));
    CHECK(curves.alpha(0, m) == doctest::Approx(3.0 - grid[m]).epsilon(1e-4));
  }
}

TEST_CASE("a single stage-3 grid point reduces to a stage-1 fit without z")
{
  std::mt19937_64 rng(8);
  const Dataset data = vcqr::testing::random_dataset(rng, 60, 1, 1, 0.5);
  Eigen::VectorXd beta(1);
  beta << 0.8;
  const double u0 = 0.45;
  Eigen::VectorXd grid(1);
  grid << u0;
  double objective = 0.0;
  FitOptions opts;
  const CurveSet refined =
    stage3_refine_curves(data, beta, 0.5, 0.3, kKernel, grid, opts, &objective);

  const Dataset reduced(data.u, data.x, Eigen::MatrixXd(data.n(), 0),
                        (data.y - data.z * beta).eval(), true);
  // d2 = 0: identical design once the response is shifted by z'beta
  const LocalQrFit direct = stage1_local_qr(reduced, u0, 0.5, 0.3, kKernel);
  CHECK(refined.alpha0_k(0, 0) == doctest::Approx(direct.a0).epsilon(1e-10));
  CHECK(refined.alpha(0, 0) == doctest::Approx(direct.alpha[0]).epsilon(1e-10));
  CHECK(objective == doctest::Approx(direct.objective).epsilon(1e-10));
}

TEST_CASE("full pipeline on noiseless data")
{
  // linear curves, so the local stages incur no approximation bias
  std::mt19937_64 rng(9);
  const Dataset data = vcqr::testing::linear_dataset(rng, 120, 1, 2, 0.0);
  const Eigen::VectorXd grid = uniform_grid(0.15, 0.85, 25);
  const SemiFit fit = fit_semi_qr(data, 0.5, 0.2, 0.2, kKernel, grid);
  CHECK(fit.beta[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.beta[1] == doctest::Approx(1.5).epsilon(1e-4));
  CHECK(fit.method == FitMethod::QR);
  CHECK(fit.q == 1);
  CHECK(fit.h_stage1 == 0.2);
}

TEST_CASE("stage 3 improves on stage 1 on average")
{
  // the gain comes from removing correlated parametric covariates from the
  // local problems, so x and z share a common factor here
  const int reps = 20, n = 200;
  const double r_shared = std::sqrt(2.0 / 3.0);
  const double r_own = std::sqrt(1.0 / 3.0);
  double ase1 = 0.0, ase3 = 0.0;
  for (int r = 0; r < reps; ++r) {
    std::mt19937_64 rng(300 + r);
    Eigen::VectorXd u(n), y(n);
    Eigen::MatrixXd x(n, 1), z(n, 2);
    for (int i = 0; i < n; ++i) {
      u[i] = uniform_open01(rng);
      const double shared = sample_standard_normal(rng);
      x(i, 0) = r_shared * shared + r_own * sample_standard_normal(rng);
      z(i, 0) = r_shared * shared + r_own * sample_standard_normal(rng);
      z(i, 1) = r_shared * shared + r_own * sample_standard_normal(rng);
      y[i] = std::sin(2.0 * M_PI * u[i]) * x(i, 0) + 2.0 * z(i, 0) + z(i, 1) +
             sample_standard_normal(rng);
    }
    const Dataset data(u, x, z, y, false);
    const SemiFit fit = fit_semi_qr(data, 0.5, 0.128, 0.128, kKernel, data.u);
    for (int i = 0; i < n; ++i) {
      const double truth = std::sin(2.0 * M_PI * u[i]);
      ase1 += std::pow(fit.stage1_curves.alpha(0, i) - truth, 2);
      ase3 += std::pow(fit.curves.alpha(0, i) - truth, 2);
    }
  }
  CHECK(ase3 < ase1);
}

TEST_CASE("fits are deterministic across parallelism degrees")
{
  std::mt19937_64 rng(10);
  const Dataset data = vcqr::testing::random_dataset(rng, 70, 1, 1, 0.5);
  const Eigen::VectorXd grid = uniform_grid(0.1, 0.9, 12);
  FitOptions serial, parallel;
  serial.threads = 1;
  parallel.threads = 4;
  const SemiFit a = fit_semi_qr(data, 0.5, 0.3, 0.3, kKernel, grid, serial);
  const SemiFit b = fit_semi_qr(data, 0.5, 0.3, 0.3, kKernel, grid, parallel);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.curves.alpha - b.curves.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.objectives.stage1 == b.objectives.stage1);
}
