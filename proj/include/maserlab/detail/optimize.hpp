#pragma once

#include <cmath>
#include <utility>

namespace maserlab::detail {

/// Golden-section maximisation of a unimodal f on [lo, hi], searched in
/// log(x) so that decades are weighted evenly. Returns (argmax, max).
template <class F>
std::pair<double, double> golden_max_log(F&& f, double lo, double hi, double rel_tol = 1e-10,
                                         int max_iter = 500) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(lo), b = std::log(hi);
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(std::exp(c));
  double fd = f(std::exp(d));
  for (int i = 0; i < max_iter && (b - a) > rel_tol; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(std::exp(d));
    }
  }
  const double x = std::exp(0.5 * (a + b));
  return {x, f(x)};
}

} // namespace maserlab::detail
