#pragma once

// Composite midpoint rule used as the independent integration oracle in
// tests. The open rule never samples interval endpoints, which matters for
// kernels that jump to zero at the support boundary.

#include <cstddef>

namespace vcqr::testing {

template <typename F>
double integrate(F&& f, double a, double b, std::size_t intervals = 1 << 16)
{
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = 0.0;
  for (std::size_t i = 0; i < intervals; ++i) {
    sum += f(a + h * (static_cast<double>(i) + 0.5));
  }
  return sum * h;
}

//! Composite Simpson rule for smooth integrands (higher order than the
//! midpoint rule, but samples the endpoints).
template <typename F>
double simpson(F&& f, double a, double b, std::size_t intervals = 1 << 14)
{
  if (intervals % 2 != 0) {
    ++intervals;
  }
  const double h = (b - a) / static_cast<double>(intervals);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < intervals; ++i) {
    sum += f(a + h * static_cast<double>(i)) * (i % 2 == 0 ? 2.0 : 4.0);
  }
  return sum * h / 3.0;
}

} // namespace vcqr::testing
