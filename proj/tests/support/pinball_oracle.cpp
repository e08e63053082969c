#include "support/pinball_oracle.hpp"

#include <vector>

namespace vcqr::testing {

namespace {

PinballSolution enumerate_basic_solutions(const PinballProblem& problem);

} // namespace

PinballSolution brute_force_oracle(const PinballProblem& problem)
{
  if (problem.cols() > 3 || problem.rows() > 25) {
    throw Error(ErrorCode::OracleTooLarge,
                "brute_force_oracle: limited to p <= 3 and rows <= 25");
  }
  return enumerate_basic_solutions(problem);
}

PinballSolution brute_force_oracle_extended(const PinballProblem& problem)
{
  if (problem.cols() > 3 || problem.rows() > 80) {
    throw Error(ErrorCode::OracleTooLarge,
                "brute_force_oracle_extended: limited to p <= 3 and rows <= 80");
  }
  return enumerate_basic_solutions(problem);
}

namespace {

PinballSolution enumerate_basic_solutions(const PinballProblem& problem)
{
  const Eigen::Index p = problem.cols();

  // hyperplane set: data rows plus one b_j = 0 plane per penalized coordinate
  std::vector<Eigen::VectorXd> normals;
  std::vector<double> offsets;
  for (Eigen::Index i = 0; i < problem.rows(); ++i) {
    normals.push_back(problem.features().row(i).transpose());
    offsets.push_back(problem.response()[i]);
  }
  for (Eigen::Index j = 0; j < problem.penalty().size(); ++j) {
    if (problem.penalty()[j] > 0.0) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(p);
      e[j] = 1.0;
      normals.push_back(std::move(e));
      offsets.push_back(0.0);
    }
  }

  PinballSolution best;
  best.coefficients = Eigen::VectorXd::Zero(p);
  best.objective = pinball_objective(problem, best.coefficients);
  best.status = SolveStatus::Optimal;

  const int m = static_cast<int>(normals.size());
  std::vector<int> pick(static_cast<std::size_t>(p));
  auto consider = [&](const Eigen::VectorXd& b) {
    const double obj = pinball_objective(problem, b);
    if (obj < best.objective) {
      best.objective = obj;
      best.coefficients = b;
    }
  };

  // enumerate p-subsets with three nested levels (p <= 3)
  for (int i = 0; i < m; ++i) {
    pick[0] = i;
    if (p == 1) {
      Eigen::Matrix<double, 1, 1> a;
      a(0, 0) = normals[i][0];
      if (std::abs(a(0, 0)) > 1e-12) {
        Eigen::VectorXd b(1);
        b[0] = offsets[static_cast<std::size_t>(i)] / a(0, 0);
        consider(b);
      }
      continue;
    }
    for (int j = i + 1; j < m; ++j) {
      pick[1] = j;
      if (p == 2) {
        Eigen::Matrix2d a;
        a.row(0) = normals[i].transpose();
        a.row(1) = normals[j].transpose();
        if (std::abs(a.determinant()) > 1e-10) {
          Eigen::Vector2d rhs(offsets[static_cast<std::size_t>(i)],
                              offsets[static_cast<std::size_t>(j)]);
          consider(a.inverse() * rhs);
        }
        continue;
      }
      for (int k = j + 1; k < m; ++k) {
        Eigen::Matrix3d a;
        a.row(0) = normals[i].transpose();
        a.row(1) = normals[j].transpose();
        a.row(2) = normals[k].transpose();
        if (std::abs(a.determinant()) > 1e-10) {
          Eigen::Vector3d rhs(offsets[static_cast<std::size_t>(i)],
                              offsets[static_cast<std::size_t>(j)],
                              offsets[static_cast<std::size_t>(k)]);
          consider(a.inverse() * rhs);
        }
      }
    }
  }
  return best;
}

} // namespace

} // namespace vcqr::testing
