#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "vcqr/errors.hpp"
#include "vcqr/model.hpp"

namespace vcqr {

//! Error distributions used by the efficiency calculations and the
//! simulation studies. All are centered: mean zero when the mean exists
//! (the log-normal is shifted by -e^{1/2}), median zero for the Cauchy.
class ErrorDist {
public:
  enum class Kind {
    Normal,
    Logistic,
    Cauchy,
    StudentT,
    NormalMixture,
    CenteredLogNormal,
    PointMass,  // degenerate at 0; sampling-only, for harness tests
  };

  static ErrorDist normal();
  static ErrorDist logistic();
  static ErrorDist cauchy();
  static ErrorDist student_t(double df);
  static ErrorDist normal_mixture(double p, double sigma1, double sigma2);
  static ErrorDist centered_lognormal();
  static ErrorDist point_mass();

  //! Parses "normal", "logistic", "cauchy", "t3" / "t(3)", "mixture",
  //! "lognormal", "pointmass"; throws listing the valid names otherwise.
  static ErrorDist from_name(const std::string& name);

  //! The six distributions of the simulation studies.
  static std::vector<ErrorDist> builtins();

  Kind kind() const { return kind_; }
  std::string name() const;

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double p) const;
  //! Inverse-cdf sampling from the given stream.
  double sample(std::mt19937_64& rng) const;
  //! Variance; empty when infinite (Cauchy).
  std::optional<double> variance() const;

private:
  ErrorDist(Kind kind, double a = 0.0, double b = 0.0, double c = 0.0)
    : kind_(kind)
    , a_(a)
    , b_(b)
    , c_(c)
  {
  }

  Kind kind_;
  double a_, b_, c_;  // df | (p, sigma1, sigma2)
};

//! Standard normal helpers (shared with the samplers).
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

//! Uniform draw strictly inside (0,1) built from the top 53 bits of the
//! stream; keeps sampling portable across standard libraries.
double uniform_open01(std::mt19937_64& rng);
//! Inverse-cdf standard normal draw.
double sample_standard_normal(std::mt19937_64& rng);

//! Covariance tau_kk' = min(tau_k, tau_k') - tau_k tau_k' of the check-loss
//! scores; k and k' are 1-based.
double tau_cov(int k, int kp, const QuantileGrid& qgrid);

//! Efficiency factors of the composite estimator for a given error
//! distribution: r1 drives the baseline curve, r2 the coefficient curves
//! and the parametric part.
double r1(const ErrorDist& dist, int q);
double r2(const ErrorDist& dist, int q);

//! Bandwidth conversions from a least-squares bandwidth.
enum class BandwidthVariant { Printed, FSquared };
double bandwidth_cqr(double h_ls, const ErrorDist& dist, int q);
double bandwidth_qr(double h_ls, const ErrorDist& dist, double tau,
                    BandwidthVariant variant = BandwidthVariant::Printed);

struct EfficiencyReport {
  std::string dist;
  int q = 1;
  double r1 = 0.0;
  double r2 = 0.0;
  double are_curves = 0.0;        //!< r2^(-4/5)
  double are_beta = 0.0;          //!< r2^(-1)
  double bandwidth_ratio = 0.0;   //!< r2^(1/5)
  //! Efficiency against the least-squares fit, which carries the error
  //! variance: var/r2 for beta and (var/r2)^(4/5) for the curves. Infinite
  //! (divergent least squares) when the variance does not exist.
  double are_beta_vs_ls = 0.0;
  double are_curves_vs_ls = 0.0;
  bool ls_divergent = false;
};

std::vector<EfficiencyReport> are_report(const ErrorDist& dist,
                                         const std::vector<int>& q_list);

} // namespace vcqr
