#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "maserlab/constants.hpp"

namespace maserlab::detail {

/// Real roots of x^3 + b x^2 + c x + d, ascending, each refined by Newton
/// steps. Repeated roots are reported once.
inline std::vector<double> real_cubic_roots(double b, double c, double d) {
  const double p = c - b * b / 3.0;
  const double q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
  const double shift = -b / 3.0;
  const double disc = 0.25 * q * q + p * p * p / 27.0;

  std::vector<double> roots;
  if (disc > 0.0) {
    // One real root; pick the Cardano term without cancellation.
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(q > 0.0 ? -0.5 * q - sq : -0.5 * q + sq);
    const double t = u != 0.0 ? u - p / (3.0 * u) : 0.0;
    roots.push_back(t + shift);
  } else if (p == 0.0) {
    roots.push_back(shift);
  } else {
    const double m = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * m), -1.0, 1.0);
    const double th = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(m * std::cos(th - constants::two_pi * k / 3.0) + shift);
  }

  for (double& x : roots) {
    for (int it = 0; it < 3; ++it) {
      const double f = ((x + b) * x + c) * x + d;
      const double df = (3.0 * x + 2.0 * b) * x + c;
      if (df == 0.0) break;
      const double nx = x - f / df;
      const double fn = ((nx + b) * nx + c) * nx + d;
      if (!(std::abs(fn) < std::abs(f))) break;
      x = nx;
    }
  }
  std::sort(roots.begin(), roots.end());
  const double scale = std::max({1.0, std::abs(b), std::sqrt(std::abs(c)), std::cbrt(std::abs(d))});
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [&](double x, double y) { return std::abs(x - y) <= 1e-14 * scale; }),
              roots.end());
  return roots;
}

} // namespace maserlab::detail
