#include "vcqr/kernels.hpp"

#include <cmath>
#include <string>

namespace vcqr {

double kernel_weight(const KernelSpec& spec, double t)
{
  const double a = std::abs(t);
  if (a >= 1.0) {
    return 0.0;
  }
  switch (spec.kind) {
    case KernelKind::Epanechnikov:
      return 0.75 * (1.0 - t * t);
    case KernelKind::Uniform:
      return 0.5;
    case KernelKind::Triangular:
      return 1.0 - a;
  }
  return 0.0;
}

KernelMoments kernel_moments(const KernelSpec& spec)
{
  switch (spec.kind) {
    case KernelKind::Epanechnikov:
      return {0.2, 0.6};
    case KernelKind::Uniform:
      return {1.0 / 3.0, 0.5};
    case KernelKind::Triangular:
      return {1.0 / 6.0, 2.0 / 3.0};
  }
  return {};
}

Eigen::VectorXd local_weights(const KernelSpec& spec, const Eigen::VectorXd& u,
                              double u0, double h, Eigen::Index min_nonzero)
{
  if (!(h > 0.0)) {
    throw Error(ErrorCode::InvalidBandwidth,
                "local_weights: bandwidth must be positive, got " + std::to_string(h));
  }
  Eigen::VectorXd w(u.size());
  Eigen::Index nonzero = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    w[i] = kernel_weight(spec, (u[i] - u0) / h) / h;
    if (w[i] > 0.0) {
      ++nonzero;
    }
  }
  if (nonzero < min_nonzero) {
    throw Error(ErrorCode::InsufficientLocalData,
                "local_weights: only " + std::to_string(nonzero) +
                  " observations in the window at u0=" + std::to_string(u0) + " (need " +
                  std::to_string(min_nonzero) + ")");
  }
  return w;
}

} // namespace vcqr
