#include "vcqr/efficiency.hpp"

#include <cmath>
#include <limits>

namespace vcqr {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt2 = std::sqrt(2.0);
const double kLogNormShift = std::exp(0.5);

//! Acklam's rational approximation of the inverse normal cdf, polished
//! with one Halley step; accurate to ~1e-15 on (0,1).
double inv_normal(double p)
{
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "normal_quantile: p must be in (0,1)");
  }
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    const double t = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  } else if (p <= 1.0 - plow) {
    const double t = p - 0.5;
    const double r = t * t;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * t /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double t = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * t + c[1]) * t + c[2]) * t + c[3]) * t + c[4]) * t + c[5]) /
        ((((d[0] * t + d[1]) * t + d[2]) * t + d[3]) * t + 1.0);
  }
  const double e = 0.5 * std::erfc(-x / kSqrt2) - p;
  const double u = e * std::sqrt(2.0 * kPi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

//! Regularized incomplete beta by Lentz's continued fraction.
double betacf(double a, double b, double x)
{
  const double tiny = 1e-300;
  const double eps = 1e-15;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x)
{
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_pdf(double x, double df)
{
  const double ln = std::lgamma(0.5 * (df + 1.0)) - std::lgamma(0.5 * df) -
                    0.5 * std::log(df * kPi) -
                    0.5 * (df + 1.0) * std::log1p(x * x / df);
  return std::exp(ln);
}

double student_t_cdf(double x, double df)
{
  if (x == 0.0) return 0.5;
  const double ib = reg_inc_beta(0.5 * df, 0.5, df / (df + x * x));
  return x > 0.0 ? 1.0 - 0.5 * ib : 0.5 * ib;
}

//! Monotone bracketed inversion: bisection to ~1e-13 on the bracket.
template <typename Cdf>
double invert_cdf(Cdf&& cdf, double p, double lo, double hi)
{
  while (cdf(lo) > p) lo = lo * 2.0 - 1.0;
  while (cdf(hi) < p) hi = hi * 2.0 + 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < 1e-13 * (1.0 + std::abs(mid))) break;
  }
  return 0.5 * (lo + hi);
}

} // namespace

double uniform_open01(std::mt19937_64& rng)
{
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
}

double sample_standard_normal(std::mt19937_64& rng)
{
  return inv_normal(uniform_open01(rng));
}

double normal_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / kSqrt2);
}

double normal_quantile(double p)
{
  return inv_normal(p);
}

ErrorDist ErrorDist::normal() { return {Kind::Normal}; }
ErrorDist ErrorDist::logistic() { return {Kind::Logistic}; }
ErrorDist ErrorDist::cauchy() { return {Kind::Cauchy}; }
ErrorDist ErrorDist::student_t(double df)
{
  if (!(df > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "student_t: df must be positive");
  }
  return {Kind::StudentT, df};
}
ErrorDist ErrorDist::normal_mixture(double p, double sigma1, double sigma2)
{
  if (!(p >= 0.0 && p <= 1.0) || !(sigma1 > 0.0) || !(sigma2 > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "normal_mixture: bad parameters");
  }
  return {Kind::NormalMixture, p, sigma1, sigma2};
}
ErrorDist ErrorDist::centered_lognormal() { return {Kind::CenteredLogNormal}; }
ErrorDist ErrorDist::point_mass() { return {Kind::PointMass}; }

ErrorDist ErrorDist::from_name(const std::string& name)
{
  if (name == "normal") return normal();
  if (name == "logistic") return logistic();
  if (name == "cauchy") return cauchy();
  if (name == "t3" || name == "t(3)") return student_t(3.0);
  if (name == "mixture") return normal_mixture(0.9, 1.0, 10.0);
  if (name == "lognormal") return centered_lognormal();
  if (name == "pointmass") return point_mass();
  throw Error(ErrorCode::InvalidArgument,
              "unknown distribution '" + name +
                "'; valid: normal, logistic, cauchy, t3, mixture, lognormal, pointmass");
}

std::vector<ErrorDist> ErrorDist::builtins()
{
  return {normal(),          logistic(),          cauchy(),
          student_t(3.0),    normal_mixture(0.9, 1.0, 10.0),
          centered_lognormal()};
}

std::string ErrorDist::name() const
{
  switch (kind_) {
    case Kind::Normal: return "normal";
    case Kind::Logistic: return "logistic";
    case Kind::Cauchy: return "cauchy";
    case Kind::StudentT: return "t" + std::to_string(static_cast<int>(a_));
    case Kind::NormalMixture: return "mixture";
    case Kind::CenteredLogNormal: return "lognormal";
    case Kind::PointMass: return "pointmass";
  }
  return "?";
}

double ErrorDist::pdf(double x) const
{
  switch (kind_) {
    case Kind::Normal:
      return normal_pdf(x);
    case Kind::Logistic: {
      const double c = std::cosh(0.5 * x);
      return 0.25 / (c * c);
    }
    case Kind::Cauchy:
      return 1.0 / (kPi * (1.0 + x * x));
    case Kind::StudentT:
      return student_t_pdf(x, a_);
    case Kind::NormalMixture:
      return a_ * normal_pdf(x / b_) / b_ + (1.0 - a_) * normal_pdf(x / c_) / c_;
    case Kind::CenteredLogNormal: {
      const double t = x + kLogNormShift;
      if (t <= 0.0) return 0.0;
      return normal_pdf(std::log(t)) / t;
    }
    case Kind::PointMass:
      throw Error(ErrorCode::DegenerateDensity, "point mass has no density");
  }
  return 0.0;
}

double ErrorDist::cdf(double x) const
{
  switch (kind_) {
    case Kind::Normal:
      return normal_cdf(x);
    case Kind::Logistic:
      return 1.0 / (1.0 + std::exp(-x));
    case Kind::Cauchy:
      return 0.5 + std::atan(x) / kPi;
    case Kind::StudentT:
      return student_t_cdf(x, a_);
    case Kind::NormalMixture:
      return a_ * normal_cdf(x / b_) + (1.0 - a_) * normal_cdf(x / c_);
    case Kind::CenteredLogNormal: {
      const double t = x + kLogNormShift;
      if (t <= 0.0) return 0.0;
      return normal_cdf(std::log(t));
    }
    case Kind::PointMass:
      return x < 0.0 ? 0.0 : 1.0;
  }
  return 0.0;
}

double ErrorDist::quantile(double p) const
{
  if (kind_ != Kind::PointMass && !(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "quantile: p must be in (0,1)");
  }
  switch (kind_) {
    case Kind::Normal:
      return inv_normal(p);
    case Kind::Logistic:
      return std::log(p / (1.0 - p));
    case Kind::Cauchy:
      return std::tan(kPi * (p - 0.5));
    case Kind::StudentT: {
      const double df = a_;
      return invert_cdf([df](double x) { return student_t_cdf(x, df); }, p, -64.0, 64.0);
    }
    case Kind::NormalMixture: {
      const double lo = c_ * inv_normal(std::min(p, 1e-3));
      const double hi = c_ * inv_normal(std::max(p, 1.0 - 1e-3));
      return invert_cdf([this](double x) { return cdf(x); }, p, lo, hi);
    }
    case Kind::CenteredLogNormal:
      return std::exp(inv_normal(p)) - kLogNormShift;
    case Kind::PointMass:
      return 0.0;
  }
  return 0.0;
}

double ErrorDist::sample(std::mt19937_64& rng) const
{
  if (kind_ == Kind::PointMass) {
    return 0.0;
  }
  if (kind_ == Kind::NormalMixture) {
    // component pick then an inverse-cdf normal; two draws per sample
    const double pick = uniform_open01(rng);
    const double sigma = pick < a_ ? b_ : c_;
    return sigma * inv_normal(uniform_open01(rng));
  }
  return quantile(uniform_open01(rng));
}

std::optional<double> ErrorDist::variance() const
{
  switch (kind_) {
    case Kind::Normal:
      return 1.0;
    case Kind::Logistic:
      return kPi * kPi / 3.0;
    case Kind::Cauchy:
      return std::nullopt;
    case Kind::StudentT:
      return a_ > 2.0 ? std::optional<double>(a_ / (a_ - 2.0)) : std::nullopt;
    case Kind::NormalMixture:
      return a_ * b_ * b_ + (1.0 - a_) * c_ * c_;
    case Kind::CenteredLogNormal:
      return std::exp(2.0) - std::exp(1.0);
    case Kind::PointMass:
      return 0.0;
  }
  return std::nullopt;
}

double tau_cov(int k, int kp, const QuantileGrid& qgrid)
{
  if (k < 1 || kp < 1 || k > qgrid.q || kp > qgrid.q) {
    throw Error(ErrorCode::InvalidArgument, "tau_cov: index out of range");
  }
  const double a = qgrid.taus[k - 1];
  const double b = qgrid.taus[kp - 1];
  return std::min(a, b) - a * b;
}

namespace {

//! Evaluates f(c_k) for all levels, rejecting degenerate densities.
Eigen::VectorXd level_densities(const ErrorDist& dist, const QuantileGrid& qgrid)
{
  Eigen::VectorXd f(qgrid.q);
  for (int k = 0; k < qgrid.q; ++k) {
    const double ck = dist.quantile(qgrid.taus[k]);
    f[k] = dist.pdf(ck);
    if (!(f[k] > 0.0)) {
      throw Error(ErrorCode::DegenerateDensity,
                  "density vanishes at the " + std::to_string(qgrid.taus[k]) +
                    " quantile");
    }
  }
  return f;
}

} // namespace

double r1(const ErrorDist& dist, int q)
{
  const QuantileGrid grid(q);
  const Eigen::VectorXd f = level_densities(dist, grid);
  double sum = 0.0;
  for (int k = 1; k <= q; ++k) {
    for (int kp = 1; kp <= q; ++kp) {
      sum += tau_cov(k, kp, grid) / (f[k - 1] * f[kp - 1]);
    }
  }
  return sum / (static_cast<double>(q) * q);
}

double r2(const ErrorDist& dist, int q)
{
  const QuantileGrid grid(q);
  const Eigen::VectorXd f = level_densities(dist, grid);
  double t = 0.0;
  for (int k = 1; k <= q; ++k) {
    for (int kp = 1; kp <= q; ++kp) {
      t += tau_cov(k, kp, grid);
    }
  }
  const double c = f.sum();
  return t / (c * c);
}

double bandwidth_cqr(double h_ls, const ErrorDist& dist, int q)
{
  if (!(h_ls > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth_cqr: h must be positive");
  }
  return h_ls * std::pow(r2(dist, q), 0.2);
}

double bandwidth_qr(double h_ls, const ErrorDist& dist, double tau,
                    BandwidthVariant variant)
{
  if (!(h_ls > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth, "bandwidth_qr: h must be positive");
  }
  const double f = dist.pdf(dist.quantile(tau));
  if (!(f > 0.0)) {
    throw Error(ErrorCode::DegenerateDensity, "bandwidth_qr: density vanishes");
  }
  const double denom = variant == BandwidthVariant::Printed ? f : f * f;
  return h_ls * std::pow(tau * (1.0 - tau) / denom, 0.2);
}

std::vector<EfficiencyReport> are_report(const ErrorDist& dist,
                                         const std::vector<int>& q_list)
{
  std::vector<EfficiencyReport> out;
  out.reserve(q_list.size());
  for (int q : q_list) {
    EfficiencyReport rep;
    rep.dist = dist.name();
    rep.q = q;
    rep.r1 = r1(dist, q);
    rep.r2 = r2(dist, q);
    rep.are_curves = std::pow(rep.r2, -0.8);
    rep.are_beta = 1.0 / rep.r2;
    rep.bandwidth_ratio = std::pow(rep.r2, 0.2);
    const auto var = dist.variance();
    if (var.has_value()) {
      rep.are_beta_vs_ls = *var / rep.r2;
      rep.are_curves_vs_ls = std::pow(*var / rep.r2, 0.8);
      rep.ls_divergent = false;
    } else {
      rep.are_beta_vs_ls = std::numeric_limits<double>::infinity();
      rep.are_curves_vs_ls = std::numeric_limits<double>::infinity();
      rep.ls_divergent = true;
    }
    out.push_back(rep);
  }
  return out;
}

} // namespace vcqr
