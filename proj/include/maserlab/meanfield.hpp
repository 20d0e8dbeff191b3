#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string_view>
#include <utility>

#include "maserlab/params.hpp"

namespace maserlab {

using complex = std::complex<double>;

enum class MaserRegime { below_threshold, masing, over_pumped };

inline std::string_view to_string(MaserRegime r) {
  switch (r) {
  case MaserRegime::below_threshold: return "below-threshold";
  case MaserRegime::masing: return "masing";
  case MaserRegime::over_pumped: return "over-pumped";
  }
  return "?";
}

/// Mean-field masing-mode solution. The field amplitude is real and positive
/// in the masing regime (global phase fixed), S_minus then follows from the
/// cavity equation.
struct MeanFieldState {
  double S_z = 0.0;
  complex S_minus{};
  complex a{};
  double n_c = 0.0;
  double n_s = 0.0;
  double omega = 0.0;     ///< masing (dragged) frequency, rad/s
  double offset = 0.0;    ///< omega - omega_c, kept separately to avoid cancellation
  double delta_cs = 0.0;  ///< 2 (omega_c - omega_s) / (kappa_c + kappa_s)
  MaserRegime regime = MaserRegime::below_threshold;
};

/// Largest cavity decay that still supports masing,
/// (4 g^2 / kappa_s) (w - gamma_eg)/(w + gamma_eg) N. Zero when no threshold
/// exists (w <= gamma_eg or g = 0).
inline double masing_threshold_kappa(const DerivedRates& r) {
  if (r.w <= r.gamma_eg || r.g == 0.0) return 0.0;
  return 4.0 * r.g * r.g / r.kappa_s * (r.w - r.gamma_eg) / (r.w + r.gamma_eg) * r.N;
}

/// Pump rate above which kappa_s exceeds the collective emission rate,
/// w_max = (4 g^2 N / kappa_c - 2/T2*) / q. May be negative (no masing at all).
inline double over_pump_limit(const DerivedRates& r) {
  return (4.0 * r.g * r.g * r.N / r.kappa_c - 2.0 / r.T2_star) / r.q;
}

/// Pump-rate interval (w_lo, w_hi) on which the resonant masing condition
/// holds for the cavity decay in r. Solved exactly: the condition
/// kappa_c (q w + c0)(w + gamma) < 4 g^2 N (w - gamma) is quadratic in w.
inline std::optional<std::pair<double, double>> masing_pump_window(const DerivedRates& r) {
  const double c0 = 2.0 / r.T2_star + r.gamma_eg;
  const double G2N = 4.0 * r.g * r.g * r.N;
  const double a = r.kappa_c * r.q;
  const double b = r.kappa_c * (c0 + r.q * r.gamma_eg) - G2N;
  const double c = r.kappa_c * c0 * r.gamma_eg + G2N * r.gamma_eg;
  const double disc = b * b - 4.0 * a * c;
  if (disc <= 0.0 || b >= 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double hi = (-b + sq) / (2.0 * a);
  const double lo = c / (a * hi);
  return std::pair{lo, hi};
}

/// Pull of the masing frequency away from the cavity, kappa_c (omega_s - omega_c)
/// / (kappa_c + kappa_s).
inline double dragged_offset(const DerivedRates& r) {
  return r.kappa_c * (r.omega_s - r.omega_c) / (r.kappa_c + r.kappa_s);
}

/// kappa-weighted pull of the masing frequency between spin and cavity.
inline double dragged_frequency(const DerivedRates& r) { return r.omega_c + dragged_offset(r); }

inline double normalized_mismatch(const DerivedRates& r) {
  return 2.0 * (r.omega_c - r.omega_s) / (r.kappa_c + r.kappa_s);
}

/// Over-pumping: w beyond w_max, provided the over-pump limit is itself above
/// the inversion threshold (otherwise no pump rate can mase and the label is
/// meaningless).
inline bool is_over_pumped(const DerivedRates& r) {
  const double w_max = over_pump_limit(r);
  return w_max > r.gamma_eg && r.w > w_max;
}

/// Masing condition including the detuning penalty on the clamped inversion.
/// Strict inequality: the equality case counts as below threshold.
inline bool is_masing(const DerivedRates& r) {
  if (r.w <= r.gamma_eg || r.g == 0.0) return false;
  const double d = normalized_mismatch(r);
  return r.clamped_inversion() * (1.0 + d * d) < r.dark_inversion();
}

inline MeanFieldState steady_state(const DerivedRates& r) {
  validate(r);
  MeanFieldState st;
  st.offset = dragged_offset(r);
  st.omega = r.omega_c + st.offset;
  st.delta_cs = normalized_mismatch(r);

  if (!is_masing(r)) {
    st.S_z = r.dark_inversion();
    st.regime = is_over_pumped(r) ? MaserRegime::over_pumped : MaserRegime::below_threshold;
    return st;
  }

  st.regime = MaserRegime::masing;
  st.S_z = r.clamped_inversion() * (1.0 + st.delta_cs * st.delta_cs);
  // Population balance: kappa_c n_c = w N_g - gamma_eg N_e.
  st.n_c = ((r.w - r.gamma_eg) * r.N - (r.w + r.gamma_eg) * st.S_z) / (2.0 * r.kappa_c);
  const double amp = std::sqrt(st.n_c);
  st.a = complex(amp, 0.0);
  // Cavity equation: S- = a ((omega - omega_c) + i kappa_c/2) / g.
  st.S_minus = st.a * complex(st.offset, 0.5 * r.kappa_c) / r.g;
  st.n_s = std::norm(st.S_minus) / st.S_z;
  return st;
}

namespace detail {
// dc, ds: frame minus cavity / spin frequency.
inline double meanfield_residual(const DerivedRates& r, double S_z, complex S_minus, complex a,
                                 double dc, double ds) {
  const complex I(0.0, 1.0);
  const double N_e = 0.5 * (r.N + S_z);
  const double N_g = 0.5 * (r.N - S_z);

  const complex exchange = I * r.g * (std::conj(a) * S_minus - std::conj(S_minus) * a);
  const double pop = r.w * N_g - r.gamma_eg * N_e + exchange.real();
  const double pop_scale = std::max({std::abs(r.w * N_g), std::abs(r.gamma_eg * N_e),
                                     std::abs(exchange), 1e-300});

  const complex t1 = I * ds * S_minus;
  const complex t2 = -0.5 * r.kappa_s * S_minus;
  const complex t3 = I * r.g * S_z * a;
  const double spin_scale = std::max({std::abs(t1), std::abs(t2), std::abs(t3), 1e-300});

  const complex c1 = I * dc * a;
  const complex c2 = -0.5 * r.kappa_c * a;
  const complex c3 = -I * r.g * S_minus;
  const double cav_scale = std::max({std::abs(c1), std::abs(c2), std::abs(c3), 1e-300});

  return std::max({std::abs(pop) / pop_scale, std::abs(t1 + t2 + t3) / spin_scale,
                   std::abs(c1 + c2 + c3) / cav_scale});
}
} // namespace detail

/// Residuals of the three steady-state mean-field equations, each divided by
/// the largest term magnitude of its equation. Returns the maximum.
inline double meanfield_residual(const DerivedRates& r, double S_z, complex S_minus, complex a,
                                 double omega) {
  return detail::meanfield_residual(r, S_z, S_minus, a, omega - r.omega_c, omega - r.omega_s);
}

inline double meanfield_residual(const DerivedRates& r, const MeanFieldState& st) {
  return detail::meanfield_residual(r, st.S_z, st.S_minus, st.a, st.offset,
                                    st.offset - (r.omega_s - r.omega_c));
}

} // namespace maserlab
