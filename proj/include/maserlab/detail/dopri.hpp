#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "maserlab/error.hpp"

namespace maserlab::detail {

struct DopriOptions {
  double rtol = 1e-10;
  double atol = 1e-14;
  double h_init = 0.0;      ///< 0: pick from the initial derivative
  double h_max = 0.0;       ///< 0: unbounded
  double h_min_rel = 1e-14; ///< underflow when h < h_min_rel * |t_end|
  long max_steps = 50'000'000;
};

struct DopriStats {
  long accepted = 0;
  long rejected = 0;
  bool stiffness_detected = false;
  bool stopped_early = false;
};

/// Dormand-Prince 5(4) with FSAL, PI step control and the Hairer stiffness
/// test (h * lambda estimate > 3.25 on 15 accepted steps out of the last
/// run). `observe(t, y)` is called after every accepted step and returns true
/// to stop the integration.
template <std::size_t Dim, class Rhs, class Observer>
DopriStats dopri5(Rhs&& rhs, std::array<double, Dim>& y, double t0, double t_end,
                  const DopriOptions& opt, Observer&& observe) {
  using State = std::array<double, Dim>;
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                   a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  auto axpy = [](State& out, const State& base, double h,
                 std::initializer_list<std::pair<double, const State*>> terms) {
    for (std::size_t i = 0; i < Dim; ++i) {
      double acc = 0.0;
      for (const auto& [c, k] : terms) acc += c * (*k)[i];
      out[i] = base[i] + h * acc;
    }
  };
  auto err_norm = [&](const State& y0, const State& y1, const State& e) {
    double s = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sc = opt.atol + opt.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double r = e[i] / sc;
      s += r * r;
    }
    return std::sqrt(s / Dim);
  };

  DopriStats stats;
  const double span = t_end - t0;
  const double h_min = opt.h_min_rel * std::abs(t_end);
  const double h_max = opt.h_max > 0.0 ? opt.h_max : std::abs(span);

  State k1, k2, k3, k4, k5, k6, k7, ys, ynew, err;
  rhs(t0, y, k1);

  double h = opt.h_init;
  if (h <= 0.0) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < Dim; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 += (y[i] / sc) * (y[i] / sc);
      d1 += (k1[i] / sc) * (k1[i] / sc);
    }
    d0 = std::sqrt(d0 / Dim);
    d1 = std::sqrt(d1 / Dim);
    h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
    h = std::min(h, h_max);
  }

  double t = t0;
  double err_old = 1e-4;
  int stiff_hits = 0, nonstiff_hits = 0;
  bool last_rejected = false;

  while (t < t_end) {
    if (stats.accepted + stats.rejected >= opt.max_steps)
      throw numerical_failure("integrator exceeded the step budget", t);
    if (t + h > t_end) h = t_end - t;
    if (h < h_min) throw numerical_failure("integrator step size underflow", h);

    axpy(ys, y, h, {{a21, &k1}});
    rhs(t + c2 * h, ys, k2);
    axpy(ys, y, h, {{a31, &k1}, {a32, &k2}});
    rhs(t + c3 * h, ys, k3);
    axpy(ys, y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
    rhs(t + c4 * h, ys, k4);
    axpy(ys, y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
    rhs(t + c5 * h, ys, k5);
    State y6;
    axpy(y6, y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
    rhs(t + h, y6, k6);
    axpy(ynew, y, h, {{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
    rhs(t + h, ynew, k7);
    for (std::size_t i = 0; i < Dim; ++i)
      err[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                    e7 * k7[i]);

    const double en = err_norm(y, ynew, err);
    if (!std::isfinite(en)) {
      h *= 0.1;
      ++stats.rejected;
      last_rejected = true;
      continue;
    }

    if (en <= 1.0) {
      // Stiffness estimate: h * |J| ~ h |k7 - k6| / |ynew - y6|.
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < Dim; ++i) {
        num += (k7[i] - k6[i]) * (k7[i] - k6[i]);
        den += (ynew[i] - y6[i]) * (ynew[i] - y6[i]);
      }
      if (den > 0.0 && h * std::sqrt(num / den) > 3.25) {
        nonstiff_hits = 0;
        if (++stiff_hits >= 15) stats.stiffness_detected = true;
      } else if (++nonstiff_hits >= 6) {
        stiff_hits = 0;
      }

      t += h;
      y = ynew;
      k1 = k7;
      ++stats.accepted;
      if (observe(t, static_cast<const State&>(y))) {
        stats.stopped_early = t < t_end;
        break;
      }

      const double e = std::max(en, 1e-10);
      double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_old, 0.4 / 5.0);
      fac = std::clamp(fac, 0.2, 10.0);
      if (last_rejected) fac = std::min(fac, 1.0);
      h = std::min(h * fac, h_max);
      err_old = e;
      last_rejected = false;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      ++stats.rejected;
      last_rejected = true;
    }
  }
  return stats;
}

} // namespace maserlab::detail
