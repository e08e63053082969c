#include "cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <vcqr/efficiency.hpp>
#include <vcqr/semi_cqr.hpp>
#include <vcqr/semi_ls.hpp>
#include <vcqr/semi_qr.hpp>
#include <vcqr/simbench.hpp>
#include <vcqr/sparse_select.hpp>

namespace vcqr::cli {

namespace {

namespace fs = std::filesystem;

void ensure_dir(const std::string& dir)
{
  if (!dir.empty()) {
    fs::create_directories(dir);
  }
}

std::string join(const std::string& dir, const std::string& file)
{
  return (fs::path(dir) / file).string();
}

std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path);
  if (!out) {
    throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  }
  return out;
}

Dataset subset(const Dataset& data, const std::vector<Eigen::Index>& idx)
{
  const Eigen::Index n = static_cast<Eigen::Index>(idx.size());
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, data.d1()), z(n, data.d2());
  for (Eigen::Index i = 0; i < n; ++i) {
    u[i] = data.u[idx[static_cast<std::size_t>(i)]];
    y[i] = data.y[idx[static_cast<std::size_t>(i)]];
    x.row(i) = data.x.row(idx[static_cast<std::size_t>(i)]);
    z.row(i) = data.z.row(idx[static_cast<std::size_t>(i)]);
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y),
          data.include_baseline};
}

SemiFit fit_method(Method method, const Dataset& data, int q, double tau, double h1,
                   double h3, const KernelSpec& kernel, const Eigen::VectorXd& grid,
                   const FitOptions& options)
{
  switch (method) {
    case Method::LS:
      return fit_semi_ls(data, h1, h3, kernel, grid, options);
    case Method::QR:
      return fit_semi_qr(data, tau, h1, h3, kernel, grid, options);
    case Method::CQR:
      return fit_semi_cqr(data, QuantileGrid(q), h1, h3, kernel, grid, options);
  }
  throw Error(ErrorCode::InvalidArgument, "unknown method");
}

//! Out-of-sample loss of a fit on held-out points: check loss per level
//! for the quantile methods, squared loss for least squares.
double holdout_loss(const SemiFit& fit, const Dataset& test)
{
  const Eigen::VectorXd lo_hi = fit.curves.grid;
  const double lo = lo_hi[0];
  const double hi = lo_hi[lo_hi.size() - 1];
  const QuantileGrid qgrid(fit.q);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < test.n(); ++i) {
    const double uc = std::clamp(test.u[i], lo, hi);
    const Eigen::VectorXd vals = evaluate_curveset(fit.curves, uc);
    double covariates = 0.0;
    for (Eigen::Index j = 0; j < test.d1(); ++j) {
      covariates += vals[fit.q + j] * test.x(i, j);
    }
    if (test.d2() > 0) {
      covariates += test.z.row(i).dot(fit.beta);
    }
    if (fit.method == FitMethod::LS) {
      const double r = test.y[i] - (vals[0] + covariates);
      loss += r * r;
    } else if (fit.method == FitMethod::QR) {
      loss += check_loss(fit.tau, test.y[i] - (vals[0] + covariates));
    } else {
      for (int k = 0; k < fit.q; ++k) {
        loss += check_loss(qgrid.taus[k], test.y[i] - (vals[k] + covariates));
      }
    }
  }
  return loss;
}

void write_metadata(std::ofstream& out, const DesignSpec& spec)
{
  for (const auto* encs : {&spec.x_encodings, &spec.z_encodings}) {
    for (const ColumnEncoding& enc : *encs) {
      const std::string p = "column." + enc.name + ".";
      if (enc.categorical) {
        out << p << "type=categorical\n";
        out << p << "reference=" << enc.levels[enc.reference] << "\n";
        for (std::size_t l = 0; l < enc.levels.size(); ++l) {
          out << p << "level." << l << "=" << enc.levels[l] << "\n";
        }
      } else {
        out << p << "type=numeric\n";
        out << p << "mean=" << enc.mean << "\n";
        out << p << "scale=" << enc.scale << "\n";
      }
    }
  }
}

struct LoadedFit {
  Table table;
  DesignSpec spec;
  Dataset train;
  std::size_t test_rows = 0;
  double h3 = 0.0;
  double h1 = 0.0;
  Eigen::VectorXd grid;
  KernelSpec kernel;
  Method method = Method::CQR;
  FitOptions options;
};

LoadedFit prepare(const FitArgs& args)
{
  LoadedFit ctx{read_table(args.input), {}, {}, 0, 0, 0, {}, {}, Method::CQR, {}};
  const Roles roles = parse_roles(args.roles);
  EncodingOptions enc;
  enc.standardize = args.standardize;
  enc.categorical = args.categorical;
  if (args.ref_policy == "first") {
    enc.ref_policy = RefPolicy::FirstLevel;
  } else if (args.ref_policy == "last") {
    enc.ref_policy = RefPolicy::LastLevel;
  } else {
    throw Error(ErrorCode::InvalidArgument, "ref-policy must be 'first' or 'last'");
  }
  enc.include_baseline = args.baseline;

  const std::size_t total = ctx.table.rows.size();
  const std::size_t train_rows =
    args.train_rows == 0 ? total : std::min(args.train_rows, total);
  ctx.spec = DesignSpec::fit(ctx.table, roles, enc, train_rows);
  ctx.train = ctx.spec.build(ctx.table, 0, train_rows);
  ctx.test_rows = total - train_rows;

  ctx.method = parse_method(args.method);
  ctx.kernel = parse_kernel(args.kernel);
  ctx.options.threads = args.threads;

  if (!args.h_grid.empty()) {
    ctx.h3 = cv_bandwidth(ctx.train, ctx.method, args.cv_folds, args.h_grid, args.seed,
                          args.q, args.tau, ctx.kernel, ctx.options, args.grid_points);
  } else if (args.h > 0.0) {
    ctx.h3 = args.h;
  } else {
    throw Error(ErrorCode::InvalidArgument, "provide --h or an --h-grid to select");
  }
  ctx.h1 = args.h1 > 0.0 ? args.h1 : default_stage1_bandwidth(ctx.h3, ctx.train.n());
  ctx.grid = uniform_grid(ctx.train.u.minCoeff(), ctx.train.u.maxCoeff(),
                          args.grid_points);
  return ctx;
}

void write_curves_csv(const std::string& path, const CurveSet& curves)
{
  const Eigen::Index g = curves.grid.size();
  const Eigen::Index d1 = curves.alpha.rows();
  std::vector<std::string> header{"grid", "alpha0"};
  for (Eigen::Index j = 0; j < d1; ++j) {
    header.push_back("alpha_" + std::to_string(j + 1));
  }
  Eigen::MatrixXd cols(g, 2 + d1);
  cols.col(0) = curves.grid;
  cols.col(1) = curves.baseline();
  for (Eigen::Index j = 0; j < d1; ++j) {
    cols.col(2 + j) = curves.alpha.row(j);
  }
  write_csv(path, header, cols);
}

void write_beta_csv(const std::string& path, const std::vector<std::string>& names,
                    const Eigen::VectorXd& beta)
{
  std::ofstream out = open_out(path);
  out << "name,estimate\n";
  char buf[40];
  for (Eigen::Index j = 0; j < beta.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%.12g", beta[j]);
    out << names[static_cast<std::size_t>(j)] << "," << buf << "\n";
  }
}

std::string method_name(Method m)
{
  switch (m) {
    case Method::LS: return "ls";
    case Method::QR: return "qr";
    case Method::CQR: return "cqr";
  }
  return "?";
}

} // namespace

Method parse_method(const std::string& name)
{
  if (name == "ls") return Method::LS;
  if (name == "qr") return Method::QR;
  if (name == "cqr") return Method::CQR;
  throw Error(ErrorCode::InvalidArgument,
              "unknown method '" + name + "'; valid: ls, qr, cqr");
}

KernelSpec parse_kernel(const std::string& name)
{
  if (name == "epanechnikov") return KernelSpec::epanechnikov();
  if (name == "uniform") return KernelSpec::uniform();
  if (name == "triangular") return KernelSpec::triangular();
  throw Error(ErrorCode::InvalidArgument,
              "unknown kernel '" + name +
                "'; valid: epanechnikov, uniform, triangular");
}

Eigen::VectorXd predict_center(const SemiFit& fit, const Dataset& points, int* clamped)
{
  const double lo = fit.curves.grid[0];
  const double hi = fit.curves.grid[fit.curves.grid.size() - 1];
  Eigen::VectorXd out(points.n());
  int clamp_count = 0;
  for (Eigen::Index i = 0; i < points.n(); ++i) {
    double u = points.u[i];
    if (u < lo || u > hi) {
      u = std::clamp(u, lo, hi);
      ++clamp_count;
    }
    const Eigen::VectorXd vals = evaluate_curveset(fit.curves, u);
    double yhat = vals.segment(0, fit.q).mean();
    for (Eigen::Index j = 0; j < points.d1(); ++j) {
      yhat += vals[fit.q + j] * points.x(i, j);
    }
    if (points.d2() > 0) {
      yhat += points.z.row(i).dot(fit.beta);
    }
    out[i] = yhat;
  }
  if (clamped != nullptr) {
    *clamped = clamp_count;
  }
  return out;
}

double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted)
{
  if (actual.size() != predicted.size() || actual.size() == 0) {
    throw Error(ErrorCode::MismatchedLengths, "mape: length mismatch");
  }
  std::vector<double> abs_err(static_cast<std::size_t>(actual.size()));
  for (Eigen::Index i = 0; i < actual.size(); ++i) {
    abs_err[static_cast<std::size_t>(i)] = std::abs(actual[i] - predicted[i]);
  }
  std::sort(abs_err.begin(), abs_err.end());
  const std::size_t m = abs_err.size() / 2;
  return abs_err.size() % 2 == 1 ? abs_err[m] : 0.5 * (abs_err[m - 1] + abs_err[m]);
}

double cv_bandwidth(const Dataset& data, Method method, int fold_count,
                    const std::vector<double>& h_grid, std::uint64_t seed, int q,
                    double tau, const KernelSpec& kernel, const FitOptions& options,
                    int grid_points)
{
  if (h_grid.empty()) {
    throw Error(ErrorCode::InvalidArgument, "cv_bandwidth: empty bandwidth grid");
  }
  if (fold_count < 2 || fold_count > static_cast<int>(data.n())) {
    throw Error(ErrorCode::InvalidArgument, "cv_bandwidth: bad fold count");
  }

  // contiguous blocks of a seeded permutation
  std::mt19937_64 rng = substream_rng(seed, 0);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng() % (i + 1)]);
  }
  std::vector<std::vector<Eigen::Index>> folds(static_cast<std::size_t>(fold_count));
  for (std::size_t i = 0; i < order.size(); ++i) {
    folds[i * static_cast<std::size_t>(fold_count) / order.size()].push_back(order[i]);
  }

  std::vector<double> grid_sorted = h_grid;
  std::sort(grid_sorted.begin(), grid_sorted.end());

  double best_h = -1.0;
  double best_loss = std::numeric_limits<double>::infinity();
  for (double h : grid_sorted) {
    double total = 0.0;
    bool usable = true;
    for (int f = 0; f < fold_count && usable; ++f) {
      std::vector<Eigen::Index> train_idx;
      for (int g = 0; g < fold_count; ++g) {
        if (g != f) {
          train_idx.insert(train_idx.end(), folds[static_cast<std::size_t>(g)].begin(),
                           folds[static_cast<std::size_t>(g)].end());
        }
      }
      const Dataset train = subset(data, train_idx);
      const Dataset test = subset(data, folds[static_cast<std::size_t>(f)]);
      try {
        const double h1 = default_stage1_bandwidth(h, train.n());
        const Eigen::VectorXd grid =
          uniform_grid(train.u.minCoeff(), train.u.maxCoeff(), grid_points);
        const SemiFit fit = fit_method(method, train, q, tau, h1, h, kernel, grid,
                                       options);
        total += holdout_loss(fit, test);
      } catch (const Error&) {
        usable = false;  // fold failure recorded by skipping this bandwidth
      }
    }
    if (usable && total <= best_loss) {
      best_loss = total;  // ties go to the larger bandwidth (ascending scan)
      best_h = h;
    }
  }
  if (best_h < 0.0) {
    throw Error(ErrorCode::InsufficientLocalData,
                "cv_bandwidth: every candidate bandwidth failed");
  }
  return best_h;
}

void cmd_fit(const FitArgs& args)
{
  ensure_dir(args.out_dir);
  LoadedFit ctx = prepare(args);
  const SemiFit fit = fit_method(ctx.method, ctx.train, args.q, args.tau, ctx.h1,
                                 ctx.h3, ctx.kernel, ctx.grid, ctx.options);

  write_beta_csv(join(args.out_dir, "beta.csv"), ctx.spec.z_names, fit.beta);
  write_curves_csv(join(args.out_dir, "curves.csv"), fit.curves);

  std::ofstream report = open_out(join(args.out_dir, "report.csv"));
  report << "metric,value\n";
  report << "stage1_objective," << fit.objectives.stage1 << "\n";
  report << "stage2_objective," << fit.objectives.stage2 << "\n";
  report << "stage3_objective," << fit.objectives.stage3 << "\n";
  report << "quantile_crossings," << fit.quantile_crossings << "\n";
  if (ctx.test_rows > 0) {
    const Dataset test =
      ctx.spec.build(ctx.table, ctx.table.rows.size() - ctx.test_rows,
                     ctx.table.rows.size());
    int clamped = 0;
    const Eigen::VectorXd pred = predict_center(fit, test, &clamped);
    report << "mape," << mape(test.y, pred) << "\n";
    report << "test_rows," << test.n() << "\n";
    report << "clamped_predictions," << clamped << "\n";
  }

  std::ofstream meta = open_out(join(args.out_dir, "metadata.txt"));
  meta << "command=fit\n";
  meta << "input=" << args.input << "\n";
  meta << "method=" << method_name(ctx.method) << "\n";
  meta << "q=" << args.q << "\n";
  meta << "tau=" << args.tau << "\n";
  meta << "h_stage3=" << ctx.h3 << "\n";
  meta << "h_stage1=" << ctx.h1 << "\n";
  meta << "kernel=" << args.kernel << "\n";
  meta << "grid_points=" << args.grid_points << "\n";
  meta << "train_rows=" << ctx.train.n() << "\n";
  meta << "test_rows=" << ctx.test_rows << "\n";
  meta << "standardize=" << (args.standardize ? 1 : 0) << "\n";
  meta << "ref_policy=" << args.ref_policy << "\n";
  meta << "baseline=" << (args.baseline ? 1 : 0) << "\n";
  meta << "seed=" << args.seed << "\n";
  meta << "threads=" << args.threads << "\n";
  write_metadata(meta, ctx.spec);
}

void cmd_select(const SelectArgs& args)
{
  ensure_dir(args.fit.out_dir);
  LoadedFit ctx = prepare(args.fit);
  const SemiFit pilot = fit_method(ctx.method, ctx.train, args.fit.q, args.fit.tau,
                                   ctx.h1, ctx.h3, ctx.kernel, ctx.grid, ctx.options);

  Eigen::VectorXd lambdas;
  if (!args.lambda_grid.empty()) {
    lambdas = Eigen::VectorXd::Map(args.lambda_grid.data(),
                                   static_cast<Eigen::Index>(args.lambda_grid.size()));
  } else {
    lambdas = default_lambda_grid(ctx.train, pilot.beta,
                                  ctx.method == Method::CQR ? args.fit.q : 1,
                                  args.lambda_points);
  }

  SparseOptions sparse;
  sparse.scad_a = args.scad_a;
  SelectionResult sel;
  switch (ctx.method) {
    case Method::CQR:
      sel = bic_select(ctx.train, pilot.stage1_curves, pilot.beta,
                       QuantileGrid(args.fit.q), lambdas, sparse);
      break;
    case Method::QR:
      sel = bic_select_qr(ctx.train, pilot.stage1_curves, pilot.beta, args.fit.tau,
                          lambdas, sparse);
      break;
    case Method::LS:
      sel = bic_select_ls(ctx.train, pilot.stage1_curves, pilot.beta, lambdas, sparse);
      break;
  }

  // curves refit under the selected parametric part
  SemiFit final_fit = pilot;
  final_fit.beta = sel.beta;
  double stage3_obj = 0.0;
  switch (ctx.method) {
    case Method::CQR:
      final_fit.curves =
        stage3_refine_curves_cqr(ctx.train, sel.beta, QuantileGrid(args.fit.q), ctx.h3,
                                 ctx.kernel, ctx.grid, ctx.options, &stage3_obj);
      break;
    case Method::QR:
      final_fit.curves = stage3_refine_curves(ctx.train, sel.beta, args.fit.tau, ctx.h3,
                                              ctx.kernel, ctx.grid, ctx.options,
                                              &stage3_obj);
      break;
    case Method::LS: {
      // least-squares stage 3 via a refit on the adjusted responses
      final_fit.curves = fit_semi_ls(ctx.train, ctx.h1, ctx.h3, ctx.kernel, ctx.grid,
                                     ctx.options)
                           .curves;
      Dataset adjusted(ctx.train.u, ctx.train.x, Eigen::MatrixXd(ctx.train.n(), 0),
                       (ctx.train.y - ctx.train.z * sel.beta).eval(),
                       ctx.train.include_baseline);
      final_fit.curves =
        fit_semi_ls(adjusted, ctx.h1, ctx.h3, ctx.kernel, ctx.grid, ctx.options).curves;
      break;
    }
  }

  std::ofstream path_csv = open_out(join(args.fit.out_dir, "path.csv"));
  path_csv << "lambda,df,loss,bic\n";
  for (const PathRecord& rec : sel.path) {
    path_csv << rec.lambda << "," << rec.df << "," << rec.loss << "," << rec.bic
             << "\n";
  }
  write_beta_csv(join(args.fit.out_dir, "selected.csv"), ctx.spec.z_names, sel.beta);
  write_curves_csv(join(args.fit.out_dir, "curves.csv"), final_fit.curves);

  std::ofstream report = open_out(join(args.fit.out_dir, "report.csv"));
  report << "metric,value\n";
  report << "lambda," << sel.lambda << "\n";
  report << "df," << sel.df << "\n";
  report << "bic," << sel.bic << "\n";
  report << "loss_clamped," << (sel.loss_clamped ? 1 : 0) << "\n";
  if (ctx.test_rows > 0) {
    const Dataset test =
      ctx.spec.build(ctx.table, ctx.table.rows.size() - ctx.test_rows,
                     ctx.table.rows.size());
    int clamped = 0;
    const Eigen::VectorXd pred = predict_center(final_fit, test, &clamped);
    report << "mape," << mape(test.y, pred) << "\n";
    report << "test_rows," << test.n() << "\n";
    report << "clamped_predictions," << clamped << "\n";
  }

  std::ofstream meta = open_out(join(args.fit.out_dir, "metadata.txt"));
  meta << "command=select\n";
  meta << "method=" << method_name(ctx.method) << "\n";
  meta << "q=" << args.fit.q << "\n";
  meta << "h_stage3=" << ctx.h3 << "\n";
  meta << "h_stage1=" << ctx.h1 << "\n";
  meta << "scad_a=" << args.scad_a << "\n";
  meta << "lambda_points=" << lambdas.size() << "\n";
  meta << "selected=";
  for (std::size_t i = 0; i < sel.selected.size(); ++i) {
    meta << (i ? "+" : "") << ctx.spec.z_names[static_cast<std::size_t>(sel.selected[i])];
  }
  meta << "\n";
  write_metadata(meta, ctx.spec);
}

void cmd_simulate(const SimulateArgs& args)
{
  ensure_dir(args.out_dir);
  SimConfig cfg;
  cfg.example = args.example;
  cfg.n = args.n;
  cfg.replications = args.replications;
  cfg.dist = ErrorDist::from_name(args.dist);
  cfg.seed = args.seed;
  cfg.h = args.h;
  cfg.undersmooth_stage1 = args.undersmooth_stage1;
  cfg.q = args.q;
  cfg.qr_taus = args.qr_taus;
  cfg.run_ls = args.run_ls;
  cfg.run_cqr = args.run_cqr;
  cfg.selection = args.selection;
  cfg.lambda_points = args.lambda_points;
  cfg.grid_points = args.grid_points;
  cfg.fit.threads = args.threads;

  const BenchReport report = run_monte_carlo(cfg);
  {
    std::ofstream out = open_out(join(args.out_dir, "report.csv"));
    report.write_csv(out);
  }
  {
    std::ofstream out = open_out(join(args.out_dir, "report.txt"));
    report.write_table(out);
  }
  {
    std::ofstream out = open_out(join(args.out_dir, "metadata.txt"));
    out << "command=simulate\n";
    report.write_kv(out);
  }
}

void cmd_efficiency(const EfficiencyArgs& args)
{
  ensure_dir(args.out_dir);
  std::vector<ErrorDist> dists;
  if (args.dists.empty()) {
    dists = ErrorDist::builtins();
  } else {
    for (const std::string& name : args.dists) {
      dists.push_back(ErrorDist::from_name(name));
    }
  }

  std::ofstream csv = open_out(join(args.out_dir, "efficiency.csv"));
  csv << "dist,q,r1,r2,are_curves,are_beta,bandwidth_ratio,are_beta_vs_ls,"
         "are_curves_vs_ls,ls_divergent\n";
  std::ofstream txt = open_out(join(args.out_dir, "efficiency.txt"));
  char buf[160];
  txt << "dist        q      R1       R2    ARE(curves)  ARE(beta)  h-ratio  "
         "vs-LS(beta)\n";
  for (const ErrorDist& dist : dists) {
    for (const EfficiencyReport& rep : are_report(dist, args.qs)) {
      csv << rep.dist << "," << rep.q << "," << rep.r1 << "," << rep.r2 << ","
          << rep.are_curves << "," << rep.are_beta << "," << rep.bandwidth_ratio << ","
          << rep.are_beta_vs_ls << "," << rep.are_curves_vs_ls << ","
          << (rep.ls_divergent ? 1 : 0) << "\n";
      std::snprintf(buf, sizeof(buf),
                    "%-10s %3d  %7.4f  %7.4f     %7.4f    %7.4f  %7.4f  %10.4f%s\n",
                    rep.dist.c_str(), rep.q, rep.r1, rep.r2, rep.are_curves,
                    rep.are_beta, rep.bandwidth_ratio, rep.are_beta_vs_ls,
                    rep.ls_divergent ? " (LS divergent)" : "");
      txt << buf;
    }
  }
}

} // namespace vcqr::cli
