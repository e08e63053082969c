#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vcqr/efficiency.hpp"
#include "vcqr/fit_options.hpp"
#include "vcqr/kernels.hpp"
#include "vcqr/model.hpp"

namespace vcqr {

//! Deterministic per-replication stream: depends only on (seed, index), so
//! results do not change with the parallelism degree.
std::mt19937_64 substream_rng(std::uint64_t seed, std::uint64_t index);

//! First study design: two sine curves on correlated normals, three linear
//! covariates (two correlated normals and a Bernoulli), no baseline term.
Dataset gen_example1(int n, const ErrorDist& dist, std::mt19937_64& rng);

//! Second study design: AR(1)-correlated 10-dimensional normal split into
//! (x1, x2, z1..z8) with a sparse coefficient vector.
Dataset gen_example2(int n, const ErrorDist& dist, std::mt19937_64& rng);

//! True quantities behind the generators.
Eigen::MatrixXd true_curves(int example, const Eigen::VectorXd& grid);
Eigen::VectorXd true_beta(int example);
Eigen::MatrixXd true_z_cov(int example);

//! Average squared error of the fitted coefficient curves over the grid
//! they were fitted on; the grids must agree.
double average_squared_error(const CurveSet& fitted, const Eigen::MatrixXd& truth,
                             const Eigen::VectorXd& grid);

//! Generalized mean squared error (beta_hat - beta)' E(ZZ') (beta_hat - beta).
double gmse(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_true,
            const Eigen::MatrixXd& z_cov);

//! reference/value with the 0/0 = 1 convention (noiseless runs).
double efficiency_ratio(double reference, double value);

struct SelectionTally {
  double c = 0.0;      //!< average true zeros estimated zero
  double ic = 0.0;     //!< average true nonzeros estimated zero
  double u_fit = 0.0;  //!< proportion of fits missing a true covariate
  double c_fit = 0.0;  //!< proportion of exact support recoveries
  double o_fit = 0.0;  //!< proportion keeping all true and some noise
};
SelectionTally selection_metrics(const std::vector<Eigen::VectorXd>& betas,
                                 const Eigen::VectorXd& beta_true);

struct SimConfig {
  int example = 1;
  int n = 200;
  int replications = 100;
  ErrorDist dist = ErrorDist::normal();
  std::uint64_t seed = 20100501;
  double h = 0.128;                //!< used for both local stages
  bool undersmooth_stage1 = false; //!< stage-1 bandwidth h * n^(-1/10) instead
  int q = 9;
  std::vector<double> qr_taus;     //!< additional single-level fits
  bool run_ls = true;
  bool run_cqr = true;
  bool selection = false;          //!< one-step sparse + BIC workflow
  int lambda_points = 50;
  int grid_points = 200;
  KernelSpec kernel{};
  FitOptions fit{};

  void validate() const;
};

struct MethodMetrics {
  std::string name;
  Eigen::VectorXd bias;
  Eigen::VectorXd sd;
  Eigen::VectorXd mse;
  Eigen::VectorXd rmse_ratio;  //!< MSE(LS)/MSE(method); >1 favors the method
  double ase_mean = 0.0;
  double ase_sd = 0.0;
  double rase_mean = 0.0;      //!< mean of per-replication ASE(LS)/ASE(method)
  double rase_sd = 0.0;
  int used = 0;
  int failures = 0;
};

struct SelectorMetrics {
  std::string name;
  double rgmse_median = 0.0;
  double rgmse_mad = 0.0;
  SelectionTally tally;
  int used = 0;
  int failures = 0;
};

struct BenchReport {
  SimConfig config;
  std::vector<MethodMetrics> methods;
  std::vector<SelectorMetrics> selectors;

  const MethodMetrics* find(const std::string& name) const;
  const SelectorMetrics* find_selector(const std::string& name) const;

  void write_csv(std::ostream& os) const;
  void write_kv(std::ostream& os) const;
  void write_table(std::ostream& os) const;
};

//! Runs the configured replications on deterministic substreams and
//! aggregates every metric. Replication failures are recorded per method,
//! never fatal.
BenchReport run_monte_carlo(const SimConfig& config);

} // namespace vcqr
