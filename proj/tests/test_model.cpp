#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include <vcqr/model.hpp>

using namespace vcqr;

namespace {

CurveSet make_curves(std::initializer_list<double> grid, std::initializer_list<double> c)
{
  CurveSet cs;
  cs.grid = Eigen::VectorXd::Map(grid.begin(), static_cast<Eigen::Index>(grid.size()));
  cs.alpha0_k.resize(0, cs.grid.size());
  cs.alpha.resize(1, cs.grid.size());
  Eigen::Index j = 0;
  for (double v : c) {
    cs.alpha(0, j++) = v;
  }
  return cs;
}

} // namespace

TEST_CASE("curve interpolation midpoint")
{
  const CurveSet cs = make_curves({0.0, 1.0}, {0.0, 2.0});
  CHECK(evaluate_curveset(cs, 0.5)[0] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("curve interpolation constant curve")
{
  const CurveSet cs = make_curves({0.0, 1.0}, {3.0, 3.0});
  CHECK(evaluate_curveset(cs, 0.7)[0] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("curve interpolation on a segment")
{
  const CurveSet cs = make_curves({0.0, 0.5, 1.0}, {0.0, 1.0, 4.0});
  // hand interpolation on [0.5, 1]: 1 + (4-1) * 0.5
  CHECK(evaluate_curveset(cs, 0.75)[0] == doctest::Approx(2.5).epsilon(1e-14));
}

TEST_CASE("curve evaluation is exact at grid points")
{
  CurveSet cs;
  cs.grid = Eigen::VectorXd::LinSpaced(17, -1.0, 2.0);
  cs.alpha0_k.resize(2, 17);
  cs.alpha.resize(3, 17);
  std::mt19937_64 rng(7);
  for (Eigen::Index j = 0; j < 17; ++j) {
    for (Eigen::Index k = 0; k < 2; ++k) {
      cs.alpha0_k(k, j) = static_cast<double>(rng() % 1000) / 31.0;
    }
    for (Eigen::Index k = 0; k < 3; ++k) {
      cs.alpha(k, j) = static_cast<double>(rng() % 1000) / 17.0;
    }
  }
  for (Eigen::Index j = 0; j < 17; ++j) {
    const Eigen::VectorXd v = evaluate_curveset(cs, cs.grid[j]);
    CHECK(v[0] == cs.alpha0_k(0, j));
    CHECK(v[1] == cs.alpha0_k(1, j));
    CHECK(v[2] == cs.alpha(0, j));
    CHECK(v[4] == cs.alpha(2, j));
  }
}

TEST_CASE("extrapolation refused outside the hull")
{
  const CurveSet cs = make_curves({0.0, 1.0}, {0.0, 2.0});
  CHECK_THROWS_WITH_AS(evaluate_curveset(cs, 1.5), doctest::Contains("outside grid hull"),
                       Error);
  try {
    evaluate_curveset(cs, -0.1);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ExtrapolationRefused);
  }
}

TEST_CASE("dataset rejects mismatched lengths")
{
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(3, 1);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(4, 1);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  try {
    Dataset bad(u, x, z, y);
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MismatchedLengths);
  }
}

TEST_CASE("dataset rejects empty covariate blocks")
{
  Eigen::VectorXd u = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(Dataset(u, Eigen::MatrixXd(3, 0), Eigen::MatrixXd(3, 0), y), Error);
  // d1 = 0 with z present is the partially linear shape and is allowed
  CHECK_NOTHROW(Dataset(u, Eigen::MatrixXd(3, 0), Eigen::MatrixXd::Ones(3, 1), y));
}

TEST_CASE("quantile grid levels")
{
  const QuantileGrid grid(9);
  CHECK(grid.taus.size() == 9);
  for (int k = 0; k < 9; ++k) {
    CHECK(grid.taus[k] == doctest::Approx((k + 1) / 10.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(QuantileGrid(0), Error);
}

TEST_CASE("undersmoothing default")
{
  const double h1 = default_stage1_bandwidth(0.128, 200);
  CHECK(h1 == doctest::Approx(0.128 * std::pow(200.0, -0.1)).epsilon(1e-15));
  CHECK(h1 < 0.128);
}
