#include "vcqr/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "vcqr/parallel.hpp"
#include "vcqr/semi_cqr.hpp"
#include "vcqr/semi_ls.hpp"
#include "vcqr/semi_qr.hpp"
#include "vcqr/sparse_select.hpp"

namespace vcqr {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double sample_median(std::vector<double> v)
{
  if (v.empty()) {
    return 0.0;
  }
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double sample_mad(const std::vector<double>& v)
{
  if (v.empty()) {
    return 0.0;
  }
  const double med = sample_median(v);
  std::vector<double> dev;
  dev.reserve(v.size());
  for (double x : v) {
    dev.push_back(std::abs(x - med));
  }
  return sample_median(std::move(dev));
}

std::string format_double(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", x);
  return buf;
}

std::string qr_label(double tau)
{
  char buf[24];
  std::snprintf(buf, sizeof(buf), "QR%.2f", tau);
  return buf;
}

} // namespace

std::mt19937_64 substream_rng(std::uint64_t seed, std::uint64_t index)
{
  return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x9E3779B97F4A7C15ULL)));
}

Dataset gen_example1(int n, const ErrorDist& dist, std::mt19937_64& rng)
{
  const double r_shared = std::sqrt(2.0 / 3.0);
  const double r_own = std::sqrt(1.0 / 3.0);
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 2), z(n, 3);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    const double shared = sample_standard_normal(rng);
    double corr[4];
    for (double& g : corr) {
      g = r_shared * shared + r_own * sample_standard_normal(rng);
    }
    x(i, 0) = corr[0];
    x(i, 1) = corr[1];
    z(i, 0) = corr[2];
    z(i, 1) = corr[3];
    z(i, 2) = uniform_open01(rng) < 0.4 ? 1.0 : 0.0;
    const double eps = dist.sample(rng);
    y[i] = std::sin(6.0 * M_PI * u[i]) * x(i, 0) + std::sin(2.0 * M_PI * u[i]) * x(i, 1) +
           2.0 * z(i, 0) + 1.0 * z(i, 1) + 0.5 * z(i, 2) + eps;
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y), false};
}

Dataset gen_example2(int n, const ErrorDist& dist, std::mt19937_64& rng)
{
  const Eigen::VectorXd beta = true_beta(2);
  const double rho = 0.5;
  const double innov = std::sqrt(1.0 - rho * rho);
  Eigen::VectorXd u(n), y(n);
  Eigen::MatrixXd x(n, 2), z(n, 8);
  for (int i = 0; i < n; ++i) {
    u[i] = uniform_open01(rng);
    double v[10];
    v[0] = sample_standard_normal(rng);
    for (int j = 1; j < 10; ++j) {
      v[j] = rho * v[j - 1] + innov * sample_standard_normal(rng);
    }
    x(i, 0) = v[0];
    x(i, 1) = v[1];
    for (int j = 0; j < 8; ++j) {
      z(i, j) = v[j + 2];
    }
    const double eps = dist.sample(rng);
    y[i] = std::sin(6.0 * M_PI * u[i]) * x(i, 0) + std::sin(2.0 * M_PI * u[i]) * x(i, 1) +
           z.row(i).dot(beta) + eps;
  }
  return {std::move(u), std::move(x), std::move(z), std::move(y), false};
}

Eigen::MatrixXd true_curves(int example, const Eigen::VectorXd& grid)
{
  if (example != 1 && example != 2) {
    throw Error(ErrorCode::InvalidArgument, "true_curves: example must be 1 or 2");
  }
  Eigen::MatrixXd truth(2, grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    truth(0, k) = std::sin(6.0 * M_PI * grid[k]);
    truth(1, k) = std::sin(2.0 * M_PI * grid[k]);
  }
  return truth;
}

Eigen::VectorXd true_beta(int example)
{
  if (example == 1) {
    Eigen::VectorXd b(3);
    b << 2.0, 1.0, 0.5;
    return b;
  }
  if (example == 2) {
    Eigen::VectorXd b(8);
    b << 3.0, 1.5, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0;
    return b;
  }
  throw Error(ErrorCode::InvalidArgument, "true_beta: example must be 1 or 2");
}

Eigen::MatrixXd true_z_cov(int example)
{
  if (example == 1) {
    // correlated normal pair plus an independent Bernoulli(0.4)
    Eigen::MatrixXd cov(3, 3);
    cov << 1.0, 2.0 / 3.0, 0.0, 2.0 / 3.0, 1.0, 0.0, 0.0, 0.0, 0.24;
    return cov;
  }
  if (example == 2) {
    Eigen::MatrixXd cov(8, 8);
    for (int i = 0; i < 8; ++i) {
      for (int j = 0; j < 8; ++j) {
        cov(i, j) = std::pow(0.5, std::abs(i - j));
      }
    }
    return cov;
  }
  throw Error(ErrorCode::InvalidArgument, "true_z_cov: example must be 1 or 2");
}

double average_squared_error(const CurveSet& fitted, const Eigen::MatrixXd& truth,
                             const Eigen::VectorXd& grid)
{
  if (fitted.grid.size() != grid.size() ||
      (fitted.grid - grid).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::GridMismatch, "average_squared_error: grids differ");
  }
  if (fitted.alpha.rows() != truth.rows() || truth.cols() != grid.size()) {
    throw Error(ErrorCode::GridMismatch, "average_squared_error: curve shape mismatch");
  }
  const double total = (fitted.alpha - truth).squaredNorm();
  return total / static_cast<double>(grid.size());
}

double gmse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true,
            const Eigen::MatrixXd& z_cov)
{
  if (beta_hat.size() != beta_true.size() || z_cov.rows() != beta_hat.size() ||
      z_cov.cols() != beta_hat.size()) {
    throw Error(ErrorCode::MismatchedLengths, "gmse: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(z_cov);
  if (es.eigenvalues().minCoeff() < -1e-10) {
    throw Error(ErrorCode::NotPositiveSemidefinite, "gmse: covariance is not PSD");
  }
  const Eigen::VectorXd diff = beta_hat - beta_true;
  return diff.dot(z_cov * diff);
}

double efficiency_ratio(double reference, double value)
{
  // both at numerical zero (noiseless runs): defined as 1 by convention
  if (reference <= 1e-10 && value <= 1e-10) {
    return 1.0;
  }
  if (value <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return reference / value;
}

SelectionTally selection_metrics(const std::vector<Eigen::VectorXd>& betas,
                                 const Eigen::VectorXd& beta_true)
{
  SelectionTally tally;
  if (betas.empty()) {
    return tally;
  }
  int true_zeros = 0;
  for (Eigen::Index j = 0; j < beta_true.size(); ++j) {
    if (beta_true[j] == 0.0) {
      ++true_zeros;
    }
  }
  for (const Eigen::VectorXd& b : betas) {
    if (b.size() != beta_true.size()) {
      throw Error(ErrorCode::MismatchedLengths, "selection_metrics: beta length");
    }
    int c = 0, ic = 0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
      if (b[j] == 0.0) {
        (beta_true[j] == 0.0 ? c : ic) += 1;
      }
    }
    tally.c += c;
    tally.ic += ic;
    if (ic > 0) {
      tally.u_fit += 1.0;
    } else if (c == true_zeros) {
      tally.c_fit += 1.0;
    } else {
      tally.o_fit += 1.0;
    }
  }
  const double m = static_cast<double>(betas.size());
  tally.c /= m;
  tally.ic /= m;
  tally.u_fit /= m;
  tally.c_fit /= m;
  tally.o_fit /= m;
  return tally;
}

void SimConfig::validate() const
{
  if (example != 1 && example != 2) {
    throw Error(ErrorCode::InvalidArgument, "SimConfig: example must be 1 or 2");
  }
  if (n < 50) {
    throw Error(ErrorCode::InvalidArgument, "SimConfig: n must be >= 50");
  }
  if (replications < 1) {
    throw Error(ErrorCode::InvalidArgument, "SimConfig: replications must be >= 1");
  }
  if (!(h > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "SimConfig: h must be positive");
  }
  if (q < 1 || q > 19) {
    throw Error(ErrorCode::InvalidArgument, "SimConfig: q must lie in [1, 19]");
  }
  if (grid_points < 2 || lambda_points < 1) {
    throw Error(ErrorCode::InvalidArgument, "SimConfig: bad grid sizes");
  }
  for (double tau : qr_taus) {
    if (!(tau > 0.0 && tau < 1.0)) {
      throw Error(ErrorCode::InvalidArgument, "SimConfig: tau must lie in (0,1)");
    }
  }
}

const MethodMetrics* BenchReport::find(const std::string& name) const
{
  for (const auto& m : methods) {
    if (m.name == name) {
      return &m;
    }
  }
  return nullptr;
}

const SelectorMetrics* BenchReport::find_selector(const std::string& name) const
{
  for (const auto& s : selectors) {
    if (s.name == name) {
      return &s;
    }
  }
  return nullptr;
}

namespace {

struct MethodSpec {
  enum class Kind { LS, CQR, QR } kind;
  double tau = 0.5;
  std::string name;
};

struct RepOutcome {
  std::vector<Eigen::VectorXd> beta;
  std::vector<double> ase;
  std::vector<std::uint8_t> ok;
  Eigen::VectorXd sel_cqr;
  Eigen::VectorXd sel_ls;
  double rgmse_cqr = 0.0;
  double rgmse_ls = 0.0;
  std::uint8_t sel_cqr_ok = 0;
  std::uint8_t sel_ls_ok = 0;
};

double ratio_or_one(double num, double den)
{
  if (num <= 1e-10 && den <= 1e-10) {
    return 1.0;
  }
  if (den <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return num / den;
}

} // namespace

BenchReport run_monte_carlo(const SimConfig& config)
{
  config.validate();
  const Eigen::VectorXd grid = uniform_grid(0.0, 1.0, config.grid_points);
  const Eigen::MatrixXd truth = true_curves(config.example, grid);
  const Eigen::VectorXd beta_true = true_beta(config.example);
  const Eigen::MatrixXd z_cov = true_z_cov(config.example);

  std::vector<MethodSpec> specs;
  if (config.run_ls) {
    specs.push_back({MethodSpec::Kind::LS, 0.5, "LS"});
  }
  if (config.run_cqr) {
    specs.push_back({MethodSpec::Kind::CQR, 0.5, "CQR" + std::to_string(config.q)});
  }
  for (double tau : config.qr_taus) {
    specs.push_back({MethodSpec::Kind::QR, tau, qr_label(tau)});
  }

  const std::size_t reps = static_cast<std::size_t>(config.replications);
  std::vector<RepOutcome> outcomes(reps);

  parallel_for(reps, config.fit.threads, [&](std::size_t r) {
    RepOutcome& out = outcomes[r];
    out.beta.resize(specs.size());
    out.ase.assign(specs.size(), 0.0);
    out.ok.assign(specs.size(), 0);

    std::mt19937_64 rng = substream_rng(config.seed, r);
    const Dataset data = config.example == 1 ? gen_example1(config.n, config.dist, rng)
                                             : gen_example2(config.n, config.dist, rng);
    const double h3 = config.h;
    const double h1 = config.undersmooth_stage1
      ? default_stage1_bandwidth(h3, data.n())
      : h3;

    FitOptions local = config.fit;
    local.threads = 1;  // parallelism lives at the replication level

    SemiFit ls_fit, cqr_fit;
    bool have_ls = false, have_cqr = false;
    for (std::size_t si = 0; si < specs.size(); ++si) {
      const MethodSpec& spec = specs[si];
      try {
        SemiFit fit;
        switch (spec.kind) {
          case MethodSpec::Kind::LS:
            fit = fit_semi_ls(data, h1, h3, config.kernel, grid, local);
            break;
          case MethodSpec::Kind::CQR:
            fit = fit_semi_cqr(data, QuantileGrid(config.q), h1, h3, config.kernel, grid,
                               local);
            break;
          case MethodSpec::Kind::QR:
            fit = fit_semi_qr(data, spec.tau, h1, h3, config.kernel, grid, local);
            break;
        }
        out.beta[si] = fit.beta;
        out.ase[si] = average_squared_error(fit.curves, truth, grid);
        out.ok[si] = 1;
        if (spec.kind == MethodSpec::Kind::LS) {
          ls_fit = std::move(fit);
          have_ls = true;
        } else if (spec.kind == MethodSpec::Kind::CQR) {
          cqr_fit = std::move(fit);
          have_cqr = true;
        }
      } catch (const std::exception&) {
        out.ok[si] = 0;
      }
    }

    if (config.selection) {
      SparseOptions sparse;
      sparse.solver = local.solver;
      try {
        if (!have_ls) {
          ls_fit = fit_semi_ls(data, h1, h3, config.kernel, grid, local);
          have_ls = true;
        }
        const double gmse_full_ls = gmse(ls_fit.beta, beta_true, z_cov);
        if (!have_cqr) {
          cqr_fit = fit_semi_cqr(data, QuantileGrid(config.q), h1, h3, config.kernel,
                                 grid, local);
          have_cqr = true;
        }
        {
          const Eigen::VectorXd lambdas =
            default_lambda_grid(data, cqr_fit.beta, config.q, config.lambda_points);
          const SelectionResult sel = bic_select(data, cqr_fit.stage1_curves,
                                                 cqr_fit.beta, QuantileGrid(config.q),
                                                 lambdas, sparse);
          out.sel_cqr = sel.beta;
          out.rgmse_cqr = ratio_or_one(gmse(sel.beta, beta_true, z_cov), gmse_full_ls);
          out.sel_cqr_ok = 1;
        }
        {
          const Eigen::VectorXd lambdas =
            default_lambda_grid(data, ls_fit.beta, 1, config.lambda_points);
          const SelectionResult sel = bic_select_ls(data, ls_fit.stage1_curves,
                                                    ls_fit.beta, lambdas, sparse);
          out.sel_ls = sel.beta;
          out.rgmse_ls = ratio_or_one(gmse(sel.beta, beta_true, z_cov), gmse_full_ls);
          out.sel_ls_ok = 1;
        }
      } catch (const std::exception&) {
        // flags already record which selector completed
      }
    }
  });

  BenchReport report;
  report.config = config;

  // locate the least-squares column for the relative metrics
  Eigen::Index ls_index = -1;
  for (std::size_t si = 0; si < specs.size(); ++si) {
    if (specs[si].kind == MethodSpec::Kind::LS) {
      ls_index = static_cast<Eigen::Index>(si);
    }
  }

  const Eigen::Index d2 = beta_true.size();
  std::vector<Eigen::VectorXd> mse_store(specs.size());

  for (std::size_t si = 0; si < specs.size(); ++si) {
    MethodMetrics m;
    m.name = specs[si].name;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(d2);
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(d2);
    Eigen::VectorXd mse = Eigen::VectorXd::Zero(d2);
    double ase_sum = 0.0, ase_sumsq = 0.0;
    int used = 0;
    for (const RepOutcome& out : outcomes) {
      if (!out.ok[si]) {
        continue;
      }
      ++used;
      sum += out.beta[si];
      sumsq += out.beta[si].cwiseAbs2();
      mse += (out.beta[si] - beta_true).cwiseAbs2();
      ase_sum += out.ase[si];
      ase_sumsq += out.ase[si] * out.ase[si];
    }
    m.used = used;
    m.failures = static_cast<int>(reps) - used;
    if (used > 0) {
      const double du = static_cast<double>(used);
      const Eigen::VectorXd mean = sum / du;
      m.bias = mean - beta_true;
      m.sd = used > 1
        ? ((sumsq - du * mean.cwiseAbs2()) / (du - 1.0)).cwiseMax(0.0).cwiseSqrt().eval()
        : Eigen::VectorXd::Zero(d2).eval();
      m.mse = mse / du;
      m.ase_mean = ase_sum / du;
      m.ase_sd = used > 1
        ? std::sqrt(std::max(0.0, (ase_sumsq - du * m.ase_mean * m.ase_mean) / (du - 1.0)))
        : 0.0;
    } else {
      m.bias = Eigen::VectorXd::Zero(d2);
      m.sd = Eigen::VectorXd::Zero(d2);
      m.mse = Eigen::VectorXd::Zero(d2);
    }
    mse_store[si] = m.mse;
    report.methods.push_back(std::move(m));
  }

  if (ls_index >= 0) {
    for (std::size_t si = 0; si < specs.size(); ++si) {
      MethodMetrics& m = report.methods[si];
      m.rmse_ratio.resize(d2);
      for (Eigen::Index j = 0; j < d2; ++j) {
        m.rmse_ratio[j] =
          efficiency_ratio(mse_store[static_cast<std::size_t>(ls_index)][j],
                           mse_store[si][j]);
      }
      // per-replication RASE against the least-squares curves
      std::vector<double> rase;
      rase.reserve(reps);
      for (const RepOutcome& out : outcomes) {
        if (out.ok[si] && out.ok[static_cast<std::size_t>(ls_index)]) {
          rase.push_back(
            efficiency_ratio(out.ase[static_cast<std::size_t>(ls_index)], out.ase[si]));
        }
      }
      if (!rase.empty()) {
        double s = 0.0, ss = 0.0;
        for (double v : rase) {
          s += v;
          ss += v * v;
        }
        const double mean = s / static_cast<double>(rase.size());
        m.rase_mean = mean;
        m.rase_sd = rase.size() > 1
          ? std::sqrt(std::max(0.0, (ss - rase.size() * mean * mean) /
                                      (static_cast<double>(rase.size()) - 1.0)))
          : 0.0;
      }
    }
  }

  if (config.selection) {
    auto aggregate = [&](const std::string& name, auto ok_member, auto beta_member,
                         auto rgmse_member) {
      SelectorMetrics sel;
      sel.name = name;
      std::vector<Eigen::VectorXd> betas;
      std::vector<double> rgmses;
      for (const RepOutcome& out : outcomes) {
        if (out.*ok_member) {
          betas.push_back(out.*beta_member);
          rgmses.push_back(out.*rgmse_member);
        }
      }
      sel.used = static_cast<int>(betas.size());
      sel.failures = static_cast<int>(reps) - sel.used;
      sel.tally = selection_metrics(betas, beta_true);
      sel.rgmse_median = sample_median(rgmses);
      sel.rgmse_mad = sample_mad(rgmses);
      report.selectors.push_back(std::move(sel));
    };
    aggregate("one-step CQR", &RepOutcome::sel_cqr_ok, &RepOutcome::sel_cqr,
              &RepOutcome::rgmse_cqr);
    aggregate("one-step LS", &RepOutcome::sel_ls_ok, &RepOutcome::sel_ls,
              &RepOutcome::rgmse_ls);
  }

  return report;
}

void BenchReport::write_kv(std::ostream& os) const
{
  os << "example=" << config.example << "\n";
  os << "n=" << config.n << "\n";
  os << "replications=" << config.replications << "\n";
  os << "dist=" << config.dist.name() << "\n";
  os << "seed=" << config.seed << "\n";
  os << "h=" << format_double(config.h) << "\n";
  os << "q=" << config.q << "\n";
  for (const MethodMetrics& m : methods) {
    const std::string p = "method." + m.name + ".";
    os << p << "used=" << m.used << "\n";
    os << p << "failures=" << m.failures << "\n";
    for (Eigen::Index j = 0; j < m.bias.size(); ++j) {
      const std::string suffix = std::to_string(j + 1);
      os << p << "bias." << suffix << "=" << format_double(m.bias[j]) << "\n";
      os << p << "sd." << suffix << "=" << format_double(m.sd[j]) << "\n";
      os << p << "mse." << suffix << "=" << format_double(m.mse[j]) << "\n";
      if (m.rmse_ratio.size() == m.bias.size()) {
        os << p << "rmse." << suffix << "=" << format_double(m.rmse_ratio[j]) << "\n";
      }
    }
    os << p << "ase.mean=" << format_double(m.ase_mean) << "\n";
    os << p << "ase.sd=" << format_double(m.ase_sd) << "\n";
    os << p << "rase.mean=" << format_double(m.rase_mean) << "\n";
    os << p << "rase.sd=" << format_double(m.rase_sd) << "\n";
  }
  for (const SelectorMetrics& s : selectors) {
    const std::string p = "selector." + s.name + ".";
    os << p << "used=" << s.used << "\n";
    os << p << "failures=" << s.failures << "\n";
    os << p << "rgmse.median=" << format_double(s.rgmse_median) << "\n";
    os << p << "rgmse.mad=" << format_double(s.rgmse_mad) << "\n";
    os << p << "C=" << format_double(s.tally.c) << "\n";
    os << p << "IC=" << format_double(s.tally.ic) << "\n";
    os << p << "U-fit=" << format_double(s.tally.u_fit) << "\n";
    os << p << "C-fit=" << format_double(s.tally.c_fit) << "\n";
    os << p << "O-fit=" << format_double(s.tally.o_fit) << "\n";
  }
}

void BenchReport::write_csv(std::ostream& os) const
{
  os << "section,name,metric,component,value\n";
  for (const MethodMetrics& m : methods) {
    for (Eigen::Index j = 0; j < m.bias.size(); ++j) {
      const std::string c = std::to_string(j + 1);
      os << "method," << m.name << ",bias," << c << "," << format_double(m.bias[j])
         << "\n";
      os << "method," << m.name << ",sd," << c << "," << format_double(m.sd[j]) << "\n";
      os << "method," << m.name << ",mse," << c << "," << format_double(m.mse[j]) << "\n";
      if (m.rmse_ratio.size() == m.bias.size()) {
        os << "method," << m.name << ",rmse," << c << ","
           << format_double(m.rmse_ratio[j]) << "\n";
      }
    }
    os << "method," << m.name << ",ase_mean,," << format_double(m.ase_mean) << "\n";
    os << "method," << m.name << ",ase_sd,," << format_double(m.ase_sd) << "\n";
    os << "method," << m.name << ",rase_mean,," << format_double(m.rase_mean) << "\n";
    os << "method," << m.name << ",rase_sd,," << format_double(m.rase_sd) << "\n";
    os << "method," << m.name << ",failures,," << m.failures << "\n";
  }
  for (const SelectorMetrics& s : selectors) {
    os << "selector," << s.name << ",rgmse_median,," << format_double(s.rgmse_median)
       << "\n";
    os << "selector," << s.name << ",rgmse_mad,," << format_double(s.rgmse_mad) << "\n";
    os << "selector," << s.name << ",C,," << format_double(s.tally.c) << "\n";
    os << "selector," << s.name << ",IC,," << format_double(s.tally.ic) << "\n";
    os << "selector," << s.name << ",U-fit,," << format_double(s.tally.u_fit) << "\n";
    os << "selector," << s.name << ",C-fit,," << format_double(s.tally.c_fit) << "\n";
    os << "selector," << s.name << ",O-fit,," << format_double(s.tally.o_fit) << "\n";
    os << "selector," << s.name << ",failures,," << s.failures << "\n";
  }
}

void BenchReport::write_table(std::ostream& os) const
{
  char buf[128];
  os << "Simulation: example " << config.example << ", n=" << config.n
     << ", dist=" << config.dist.name() << ", h=" << config.h
     << ", replications=" << config.replications << "\n\n";
  if (!methods.empty()) {
    os << "Bias (SD)\n";
    for (const MethodMetrics& m : methods) {
      os << "  " << m.name << ":";
      for (Eigen::Index j = 0; j < m.bias.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "  %8.3f (%.3f)", m.bias[j], m.sd[j]);
        os << buf;
      }
      os << "\n";
    }
    os << "\nRMSE vs LS (per component; >1 favors the method)\n";
    for (const MethodMetrics& m : methods) {
      if (m.rmse_ratio.size() == 0 || m.name == "LS") {
        continue;
      }
      os << "  " << m.name << ":";
      for (Eigen::Index j = 0; j < m.rmse_ratio.size(); ++j) {
        std::snprintf(buf, sizeof(buf), "  %10.3f", m.rmse_ratio[j]);
        os << buf;
      }
      os << "\n";
    }
    os << "\nRASE vs LS, mean (SD)\n";
    for (const MethodMetrics& m : methods) {
      if (m.name == "LS") {
        continue;
      }
      std::snprintf(buf, sizeof(buf), "  %s: %.3f (%.3f)\n", m.name.c_str(), m.rase_mean,
                    m.rase_sd);
      os << buf;
    }
  }
  if (!selectors.empty()) {
    os << "\nVariable selection (BIC-tuned one-step estimators)\n";
    os << "  method          RGMSE med (MAD)      C     IC   U-fit  C-fit  O-fit\n";
    for (const SelectorMetrics& s : selectors) {
      std::snprintf(buf, sizeof(buf), "  %-14s %.3f (%.3f)  %6.3f %6.3f  %5.3f  %5.3f  %5.3f\n",
                    s.name.c_str(), s.rgmse_median, s.rgmse_mad, s.tally.c, s.tally.ic,
                    s.tally.u_fit, s.tally.c_fit, s.tally.o_fit);
      os << buf;
    }
  }
}

} // namespace vcqr
