#include "three_stage.hpp"

#include <vector>

#include "vcqr/parallel.hpp"

namespace vcqr::detail {

Stage1Result fit_stage1_all(const Dataset& data, const LocalDesign& design, double h,
                            const KernelSpec& kernel, const FitOptions& options)
{
  const Eigen::Index n = data.n();
  const Eigen::Index q = design.q();
  const Eigen::Index d1 = data.d1();
  const Eigen::Index d2 = design.include_z ? data.d2() : 0;

  std::vector<LocalFit> fits(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), options.threads, [&](std::size_t i) {
    fits[i] = local_composite_fit(data, data.y, design, data.u[static_cast<Eigen::Index>(i)],
                                  h, kernel, options.solver);
  });

  Stage1Result out;
  out.curves.grid = data.u;
  out.curves.mode = CurveMode::AtObservations;
  out.curves.alpha0_k.resize(q, n);
  out.curves.alpha.resize(d1, n);
  out.initial_beta = Eigen::VectorXd::Zero(d2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const LocalFit& f = fits[static_cast<std::size_t>(i)];
    out.curves.alpha0_k.col(i) = f.intercepts;
    out.curves.alpha.col(i) = f.alpha;
    if (d2 > 0) {
      out.initial_beta += f.beta;
    }
    out.objective += f.objective;
    for (Eigen::Index k = 1; k < q; ++k) {
      // level intercepts should be ordered; tolerate solver-level noise
      const double slack = 1e-8 * (1.0 + std::abs(f.intercepts[k - 1]));
      if (f.intercepts[k] < f.intercepts[k - 1] - slack) {
        ++out.crossings;
        break;
      }
    }
  }
  if (d2 > 0) {
    out.initial_beta /= static_cast<double>(n);
  }
  return out;
}

PinballProblem build_refine_problem(const Dataset& data, const CurveSet& stage1_curves,
                                    const Eigen::VectorXd& levels)
{
  const Eigen::Index n = data.n();
  const Eigen::Index q = levels.size();
  if (stage1_curves.grid.size() != n || stage1_curves.alpha0_k.cols() != n) {
    throw Error(ErrorCode::GridMismatch,
                "refine_beta: stage-1 curves must be stored at every observation point");
  }
  if (stage1_curves.alpha0_k.rows() != q) {
    throw Error(ErrorCode::MismatchedLengths,
                "refine_beta: curve levels do not match the quantile levels");
  }
  if (data.d2() == 0) {
    throw Error(ErrorCode::InvalidProblem, "refine_beta: model has no z covariates");
  }

  Eigen::MatrixXd feats(n * q, data.d2());
  Eigen::VectorXd resp(n * q), taus(n * q);
  Eigen::VectorXd xa = stage1_curves.alpha.rows() > 0
    ? (data.x.array() * stage1_curves.alpha.transpose().array()).rowwise().sum().matrix()
    : Eigen::VectorXd::Zero(n).eval();
  Eigen::Index r = 0;
  for (Eigen::Index k = 0; k < q; ++k) {
    for (Eigen::Index i = 0; i < n; ++i, ++r) {
      feats.row(r) = data.z.row(i);
      resp[r] = data.y[i] - stage1_curves.alpha0_k(k, i) - xa[i];
      taus[r] = levels[k];
    }
  }
  return {std::move(feats), std::move(resp), std::move(taus),
          Eigen::VectorXd::Ones(n * q)};
}

BetaRefinement refine_beta(const Dataset& data, const CurveSet& stage1_curves,
                           const Eigen::VectorXd& levels,
                           const PinballSolveOptions& options)
{
  const PinballProblem problem = build_refine_problem(data, stage1_curves, levels);
  const PinballSolution sol = solve_pinball(problem, options);
  return {sol.coefficients, sol.objective, sol.status};
}

CurveSet fit_stage3(const Dataset& data, const Eigen::VectorXd& beta_hat,
                    const LocalDesign& stage3_design, double h, const KernelSpec& kernel,
                    const Eigen::VectorXd& grid, const FitOptions& options,
                    double* objective_total)
{
  Eigen::VectorXd adjusted = data.y;
  if (data.d2() > 0) {
    if (beta_hat.size() != data.d2()) {
      throw Error(ErrorCode::MismatchedLengths, "stage3: beta length != d2");
    }
    adjusted -= data.z * beta_hat;
  }

  const Eigen::Index g = grid.size();
  std::vector<LocalFit> fits(static_cast<std::size_t>(g));
  parallel_for(static_cast<std::size_t>(g), options.threads, [&](std::size_t m) {
    fits[m] = local_composite_fit(data, adjusted, stage3_design,
                                  grid[static_cast<Eigen::Index>(m)], h, kernel,
                                  options.solver);
  });

  CurveSet curves;
  curves.grid = grid;
  curves.mode = CurveMode::OnGrid;
  curves.alpha0_k.resize(stage3_design.q(), g);
  curves.alpha.resize(data.d1(), g);
  double total = 0.0;
  for (Eigen::Index m = 0; m < g; ++m) {
    const LocalFit& f = fits[static_cast<std::size_t>(m)];
    curves.alpha0_k.col(m) = f.intercepts;
    curves.alpha.col(m) = f.alpha;
    total += f.objective;
  }
  if (objective_total != nullptr) {
    *objective_total = total;
  }
  return curves;
}

SemiFit fit_three_stage(const Dataset& data, const LocalDesign& design, double h1,
                        double h3, const KernelSpec& kernel, const Eigen::VectorXd& grid,
                        const FitOptions& options, FitMethod method, double tau)
{
  if (!(h1 > 0.0) || !(h3 > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "fit: bandwidths must be positive");
  }

  Stage1Result stage1 = fit_stage1_all(data, design, h1, kernel, options);

  BetaRefinement refined;
  if (data.d2() > 0) {
    refined = refine_beta(data, stage1.curves, design.levels, options.solver);
  }

  LocalDesign stage3_design = design;
  stage3_design.include_z = false;
  double stage3_objective = 0.0;
  CurveSet curves = fit_stage3(data, refined.beta, stage3_design, h3, kernel, grid,
                               options, &stage3_objective);

  SemiFit fit;
  fit.method = method;
  fit.q = static_cast<int>(design.q());
  fit.tau = tau;
  fit.h_stage1 = h1;
  fit.h_stage3 = h3;
  fit.beta = refined.beta;
  fit.initial_beta = stage1.initial_beta;
  fit.stage1_curves = std::move(stage1.curves);
  fit.curves = std::move(curves);
  fit.objectives = {stage1.objective, refined.objective, stage3_objective};
  fit.quantile_crossings = stage1.crossings;
  fit.validate();
  return fit;
}

} // namespace vcqr::detail
