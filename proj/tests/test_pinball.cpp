#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vcqr/pinball.hpp>

#include "support/generators.hpp"
#include "support/pinball_oracle.hpp"

using namespace vcqr;
using vcqr::testing::brute_force_oracle;
using vcqr::testing::random_pinball;

namespace {

PinballProblem intercept_only(std::initializer_list<double> ys, double tau,
                              std::initializer_list<double> ws = {})
{
  const Eigen::Index n = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(n, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Map(ys.begin(), n);
  Eigen::VectorXd w = ws.size() == 0
    ? Eigen::VectorXd::Ones(n)
    : Eigen::VectorXd::Map(ws.begin(), n).eval();
  return {std::move(x), std::move(y), Eigen::VectorXd::Constant(n, tau), std::move(w)};
}

} // namespace

TEST_CASE("median of three points")
{
  const PinballSolution sol = solve_pinball(intercept_only({1.0, 2.0, 3.0}, 0.5));
  CHECK(sol.coefficients[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("weighted median")
{
  const PinballSolution sol =
    solve_pinball(intercept_only({1.0, 2.0, 3.0}, 0.5, {1.0, 2.0, 1.0}));
  CHECK(sol.coefficients[0] == doctest::Approx(2.0).epsilon(1e-7));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("first-quartile objective on a flat face")
{
  const PinballProblem prob = intercept_only({1.0, 2.0, 3.0, 4.0}, 0.25);
  const PinballSolution sol = solve_pinball(prob);
  CHECK(sol.objective == doctest::Approx(1.5).epsilon(1e-8));
  CHECK(sol.coefficients[0] >= 1.0 - 1e-6);
  CHECK(sol.coefficients[0] <= 2.0 + 1e-6);
  CHECK(sol.status == SolveStatus::Degenerate);
  const PinballSolution oracle = brute_force_oracle(prob);
  CHECK(oracle.objective == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("dominating penalty zeroes the coefficient")
{
  PinballProblem prob = intercept_only({1.0, 2.0, 3.0}, 0.5);
  prob.set_penalty(Eigen::VectorXd::Constant(1, 10.0));
  const PinballSolution sol = solve_pinball(prob);
  // total check-loss slope is at most 1.5, far below the penalty
  CHECK(std::abs(sol.coefficients[0]) < 1e-7);
  CHECK(sol.objective == doctest::Approx(3.0).epsilon(1e-7));
  const PinballSolution oracle = brute_force_oracle(prob);
  CHECK(oracle.coefficients[0] == 0.0);
  CHECK(oracle.objective == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("oracle rejects oversized problems")
{
  std::mt19937_64 rng(3);
  CHECK_THROWS_AS(brute_force_oracle(random_pinball(rng, 4, 10)), Error);
  try {
    brute_force_oracle(random_pinball(rng, 2, 26));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OracleTooLarge);
  }
}

TEST_CASE("solver matches the enumeration oracle")
{
  std::mt19937_64 rng(20260810);
  for (int trial = 0; trial < 120; ++trial) {
    const int p = 1 + static_cast<int>(rng() % 3);
    const int rows = p + 2 + static_cast<int>(rng() % 18);
    PinballProblem prob = random_pinball(rng, p, rows);
    if (trial % 3 == 0) {
      Eigen::VectorXd pen(p);
      for (int j = 0; j < p; ++j) {
        pen[j] = (rng() % 2 == 0) ? 0.0 : 0.5 + static_cast<double>(rng() % 40) / 10.0;
      }
      prob.set_penalty(pen);
    }
    const PinballSolution sol = solve_pinball(prob);
    const PinballSolution oracle = brute_force_oracle(prob);
    CHECK(sol.objective <= oracle.objective + 1e-6 * (1.0 + oracle.objective));
    CHECK(sol.objective >= oracle.objective - 1e-9 * (1.0 + oracle.objective));
  }
}

TEST_CASE("objective field is consistent with the coefficients")
{
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const PinballProblem prob = random_pinball(rng, 2, 15);
    const PinballSolution sol = solve_pinball(prob);
    const double recomputed = pinball_objective(prob, sol.coefficients);
    CHECK(sol.objective ==
          doctest::Approx(recomputed).epsilon(1e-8));
  }
}

TEST_CASE("positive scale equivariance")
{
  std::mt19937_64 rng(5);
  for (double s : {0.5, 2.0, 13.0}) {
    const PinballProblem prob = random_pinball(rng, 2, 12);
    PinballProblem scaled(prob.features(), (prob.response() * s).eval(), prob.tau(),
                          prob.weight());
    const PinballSolution a = solve_pinball(prob, {1e-10, 400, 0.99995});
    const PinballSolution b = solve_pinball(scaled, {1e-10, 400, 0.99995});
    CHECK(b.objective == doctest::Approx(s * a.objective).epsilon(1e-8));
  }
}

TEST_CASE("location equivariance in the intercept")
{
  std::mt19937_64 rng(6);
  const double c = 4.75;
  for (int trial = 0; trial < 10; ++trial) {
    const PinballProblem prob = random_pinball(rng, 2, 14, true);
    PinballProblem shifted(prob.features(), (prob.response().array() + c).matrix(),
                           prob.tau(), prob.weight());
    const PinballSolution a = solve_pinball(prob, {1e-10, 400, 0.99995});
    const PinballSolution b = solve_pinball(shifted, {1e-10, 400, 0.99995});
    CHECK(b.objective == doctest::Approx(a.objective).epsilon(1e-8).scale(1.0));
    CHECK(b.coefficients[0] == doctest::Approx(a.coefficients[0] + c).epsilon(1e-5));
  }
}

TEST_CASE("duplicating a row equals doubling its weight")
{
  std::mt19937_64 rng(8);
  PinballProblem prob = random_pinball(rng, 2, 10);
  // duplicate row 0
  Eigen::MatrixXd x(11, 2);
  Eigen::VectorXd y(11), tau(11), w(11);
  x << prob.features(), prob.features().row(0);
  y << prob.response(), prob.response()[0];
  tau << prob.tau(), prob.tau()[0];
  w << prob.weight(), prob.weight()[0];
  PinballProblem dup(std::move(x), std::move(y), std::move(tau), std::move(w));

  Eigen::VectorXd w2 = prob.weight();
  w2[0] *= 2.0;
  PinballProblem doubled(prob.features(), prob.response(), prob.tau(), std::move(w2));

  const double obj_dup = solve_pinball(dup, {1e-10, 400, 0.99995}).objective;
  const double obj_doubled = solve_pinball(doubled, {1e-10, 400, 0.99995}).objective;
  CHECK(obj_dup == doctest::Approx(obj_doubled).epsilon(1e-9));
}

TEST_CASE("input validation")
{
  CHECK_THROWS_AS(PinballProblem(Eigen::MatrixXd::Ones(0, 1), Eigen::VectorXd(),
                                 Eigen::VectorXd(), Eigen::VectorXd()),
                  Error);
  CHECK_THROWS_AS(intercept_only({1.0, 2.0}, 1.5), Error);
  CHECK_THROWS_AS(intercept_only({1.0, 2.0}, 0.5, {0.0, 0.0}), Error);
  PinballProblem ok = intercept_only({1.0, 2.0}, 0.5);
  CHECK_THROWS_AS(ok.set_penalty(Eigen::VectorXd::Constant(3, 1.0)), Error);
}

TEST_CASE("zero-weight rows do not affect the optimum")
{
  Eigen::MatrixXd x = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4), tau = Eigen::VectorXd::Constant(4, 0.5), w(4);
  y << 1.0, 2.0, 3.0, 1000.0;
  w << 1.0, 1.0, 1.0, 0.0;
  const PinballSolution sol = solve_pinball({x, y, tau, w});
  CHECK(sol.coefficients[0] == doctest::Approx(2.0).epsilon(1e-7));
}
