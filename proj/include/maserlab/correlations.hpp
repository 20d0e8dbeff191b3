#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "maserlab/constants.hpp"
#include "maserlab/detail/optimize.hpp"
#include "maserlab/meanfield.hpp"

namespace maserlab {

/// Steady state of the second-order correlation closure (valid below and
/// above threshold).
struct CorrelationState {
  double N_e = 0.0;
  double N_g = 0.0;
  double S_z = 0.0;
  /// Closure variable <S+ S->: inter-spin correlated part of the collective
  /// spin correlation.
  double spin_corr = 0.0;
  /// N_e + (1 - 1/N) <S+ S->: full correlation including single-spin terms.
  double spin_corr_total = 0.0;
  complex cross{};           ///< <a^dag S->
  double n_c = 0.0;          ///< <a^dag a>, thermal photons included
  double n_coherent = 0.0;   ///< stimulated photons, n_c - n_th
  double n_s = std::numeric_limits<double>::quiet_NaN(); ///< spin_corr / S_z, S_z > 0 only
  double emission_rate = 0.0; ///< w N_g - gamma_eg N_e, photons/s into the cavity
  double P_out = 0.0;        ///< W
};

namespace detail {

inline void require_resonant(const DerivedRates& r) {
  if (std::abs(r.omega_s - r.omega_c) > 1e-9 * (r.kappa_c + r.kappa_s))
    throw invalid_parameter("closure and linewidth models require omega_s == omega_c");
}

} // namespace detail

/// Solves the steady closure exactly. Eliminating the correlations leaves a
/// quadratic in the inversion; with the thermal drive and the finite-N
/// factor retained it is solved for delta = A - S_z, where
/// A = N (w - gamma)/(w + gamma). The stable root is the one with the
/// smaller S_z: kappa_s kappa_c/(4 g^2) above threshold, A below.
inline CorrelationState closure_steady_state(const DerivedRates& r) {
  validate(r);
  detail::require_resonant(r);

  const double A = r.dark_inversion();
  const double wsum = r.w + r.gamma_eg;
  double delta = 0.0;
  if (r.g > 0.0) {
    const double K = (r.kappa_s + r.kappa_c) / (4.0 * r.g * r.g);
    const double D = (1.0 - 1.0 / r.N) / r.kappa_s + 1.0 / r.kappa_c;
    const double stim = (1.0 + 2.0 * r.n_th) / (wsum * D);
    // delta^2 + p delta - c = 0
    const double p = K / D - A + stim;
    const double c = (r.N + A * (1.0 + 2.0 * r.n_th)) / (wsum * D);
    double disc = p * p + 4.0 * c;
    if (disc < 0.0) {
      if (disc < -1e-12 * p * p)
        throw numerical_failure("closure quadratic has no real root", disc);
      disc = 0.0;
    }
    const double sq = std::sqrt(disc);
    delta = p > 0.0 ? 2.0 * c / (p + sq) : 0.5 * (sq - p);
  }

  CorrelationState cs;
  cs.S_z = A - delta;
  cs.N_e = 0.5 * (r.N + cs.S_z);
  cs.N_g = 0.5 * (r.N - cs.S_z);
  cs.emission_rate = 0.5 * wsum * delta;
  cs.spin_corr = cs.S_z * cs.emission_rate / r.kappa_s;
  cs.spin_corr_total = cs.N_e + (1.0 - 1.0 / r.N) * cs.spin_corr;
  cs.n_coherent = cs.emission_rate / r.kappa_c;
  cs.n_c = r.n_th + cs.n_coherent;
  if (r.g > 0.0) cs.cross = complex(0.0, cs.emission_rate / (2.0 * r.g));
  if (cs.S_z > 0.0) cs.n_s = cs.spin_corr / cs.S_z;
  cs.P_out = constants::hbar * r.omega_c * r.kappa_ex * cs.n_c;
  return cs;
}

/// Maximum over the four steady closure equations of |residual| divided by
/// the largest term of that equation.
inline double closure_residual(const DerivedRates& r, const CorrelationState& cs) {
  const double ImX = cs.cross.imag();
  const double flow = 2.0 * r.g * ImX;  // -ig(X - X*) = 2 g Im X
  auto rel = [](double sum, std::initializer_list<double> terms) {
    double scale = 1e-300;
    for (double t : terms) scale = std::max(scale, std::abs(t));
    return std::abs(sum) / scale;
  };

  const double ra = rel(r.w * cs.N_g - r.gamma_eg * cs.N_e - flow,
                        {r.w * cs.N_g, r.gamma_eg * cs.N_e, flow});

  const double half = 0.5 * (r.kappa_s + r.kappa_c);
  const double corr = (1.0 - 1.0 / r.N) * cs.spin_corr;
  const double stim = cs.n_c * cs.S_z;
  // -(ks+kc)/2 X + i g [...]: real part is -(ks+kc)/2 Re X, imaginary part:
  const double rb_im = -half * ImX + r.g * (corr + cs.N_e + stim);
  const double rb_re = -half * cs.cross.real();
  const double rb = std::max(rel(rb_im, {half * ImX, r.g * corr, r.g * cs.N_e, r.g * stim}),
                             rel(rb_re, {half * std::abs(cs.cross)}));

  const double rc = rel(-r.kappa_s * cs.spin_corr + cs.S_z * flow,
                        {r.kappa_s * cs.spin_corr, cs.S_z * flow});
  const double rd = rel(-r.kappa_c * cs.n_c + flow + r.kappa_c * r.n_th,
                        {r.kappa_c * cs.n_c, flow, r.kappa_c * r.n_th});
  return std::max({ra, rb, rc, rd});
}

struct CorrelationOptimum {
  double w_opt = 0.0;
  double corr_max = 0.0;
};

/// Closed-form optimum of <S+ S-> over the pump rate (gamma_eg neglected):
/// q w = 2 N g^2 / kappa_c - 1/T2*,
/// max = N^2/(8q) (1 - kappa_c / (2 N g^2 T2*))^2.
inline CorrelationOptimum optimal_pump_for_correlation(const DerivedRates& r) {
  validate(r);
  if (!masing_pump_window(r))
    throw not_masing("no pump rate satisfies the masing condition at this cavity decay");
  const double coll = 2.0 * r.N * r.g * r.g;
  CorrelationOptimum opt;
  opt.w_opt = (coll / r.kappa_c - 1.0 / r.T2_star) / r.q;
  const double f = 1.0 - r.kappa_c / (coll * r.T2_star);
  opt.corr_max = r.N * r.N / (8.0 * r.q) * f * f;
  return opt;
}

/// Numerical optimum of the closure's <S+ S-> over w inside the masing window.
inline CorrelationOptimum maximize_spin_correlation(const DerivedRates& r) {
  const auto window = masing_pump_window(r);
  if (!window) throw not_masing("no pump rate satisfies the masing condition");
  auto [w, c] = detail::golden_max_log(
      [&](double w) { return closure_steady_state(r.with_pump(w)).spin_corr; }, window->first,
      window->second);
  return {w, c};
}

} // namespace maserlab
