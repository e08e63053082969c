#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <vcqr/fit_options.hpp>
#include <vcqr/kernels.hpp>
#include <vcqr/model.hpp>

#include "cli/table.hpp"

namespace vcqr::cli {

enum class Method { LS, QR, CQR };
Method parse_method(const std::string& name);
KernelSpec parse_kernel(const std::string& name);

struct FitArgs {
  std::string input;
  std::string roles;
  std::string out_dir = ".";
  std::string method = "cqr";
  int q = 9;
  double tau = 0.5;
  double h = 0.0;               //!< stage-3 bandwidth; 0 requires --h-grid
  double h1 = 0.0;              //!< 0 derives the undersmoothed default
  std::vector<double> h_grid;   //!< cross-validation candidates
  int cv_folds = 5;
  std::uint64_t seed = 1;
  std::size_t train_rows = 0;   //!< 0 = every row trains (no held-out split)
  bool standardize = true;
  std::vector<std::string> categorical;
  std::string ref_policy = "first";
  bool baseline = true;
  int grid_points = 200;
  int threads = 1;
  std::string kernel = "epanechnikov";
};

struct SelectArgs {
  FitArgs fit;
  std::vector<double> lambda_grid;  //!< empty = default path
  int lambda_points = 50;
  double scad_a = 3.7;
};

struct SimulateArgs {
  int example = 1;
  int n = 200;
  int replications = 100;
  std::string dist = "normal";
  double h = 0.128;
  bool undersmooth_stage1 = false;
  int q = 9;
  std::vector<double> qr_taus;
  bool run_ls = true;
  bool run_cqr = true;
  bool selection = false;
  int lambda_points = 50;
  int grid_points = 200;
  std::uint64_t seed = 20100501;
  int threads = 1;
  std::string out_dir = ".";
};

struct EfficiencyArgs {
  std::vector<std::string> dists;  //!< empty = every built-in
  std::vector<int> qs = {1, 5, 9, 19, 99};
  std::string out_dir = ".";
};

void cmd_fit(const FitArgs& args);
void cmd_select(const SelectArgs& args);
void cmd_simulate(const SimulateArgs& args);
void cmd_efficiency(const EfficiencyArgs& args);

//! Five-fold (by default) cross-validated bandwidth: out-of-fold check
//! loss for the quantile methods, squared loss for least squares; ties go
//! to the larger bandwidth. Folds are contiguous blocks of a seeded
//! permutation. Candidate bandwidths whose folds fail are skipped.
double cv_bandwidth(const Dataset& data, Method method, int fold_count,
                    const std::vector<double>& h_grid, std::uint64_t seed, int q,
                    double tau, const KernelSpec& kernel, const FitOptions& options,
                    int grid_points = 200);

//! Center prediction from a fit: averaged intercept curves plus the
//! covariate terms; index values outside the curve hull are clamped to the
//! nearest endpoint and counted.
Eigen::VectorXd predict_center(const SemiFit& fit, const Dataset& points,
                               int* clamped = nullptr);

//! Median absolute prediction error.
double mape(const Eigen::VectorXd& actual, const Eigen::VectorXd& predicted);

} // namespace vcqr::cli
