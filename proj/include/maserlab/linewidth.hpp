#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <span>
#include <vector>

#include "maserlab/correlations.hpp"
#include "maserlab/detail/optimize.hpp"

namespace maserlab {

struct SpectrumSample {
  double omega = 0.0;       ///< offset from the carrier, rad/s
  double value = 0.0;       ///< phase-noise density S_c / (4 n_c)
  double spin_term = 0.0;   ///< spin-noise contribution to value
  double cavity_term = 0.0; ///< cavity (vacuum + thermal) contribution to value
};

struct PhaseNoiseResult {
  double gamma_st = 0.0;       ///< phase diffusion coefficient, 1/s
  double T_coh = 0.0;          ///< 2 / gamma_st, s
  double fwhm_linewidth = 0.0; ///< gamma_st / 2pi, Hz
  double n_incoh = 0.0;        ///< n_th + N_e / S_z
  double n_c = 0.0;            ///< coherent photon number used
  double n_s = 0.0;            ///< coherent magnon number used
  std::vector<SpectrumSample> spectrum;
};

namespace detail {

inline void require_masing(const DerivedRates& r, const CorrelationState& cs) {
  if (!is_masing(r) || !(cs.S_z > 0.0) || !(cs.n_coherent > 0.0))
    throw not_masing("operation requires a masing steady state");
}

} // namespace detail

/// Phase-noise spectral density at offsets omega_grid (rad/s), normalised by
/// 4 n_c so that omega^2 * value tends to the Schawlow-Townes coefficient at
/// low frequency.
inline std::vector<SpectrumSample> phase_noise_spectrum(const DerivedRates& r,
                                                        const CorrelationState& cs,
                                                        std::span<const double> omega_grid) {
  detail::require_masing(r, cs);
  const double K = 0.5 * (r.kappa_c + r.kappa_s);
  const double K2 = K * K;
  const double denom = 4.0 * cs.n_coherent * K2;
  std::vector<SpectrumSample> out;
  out.reserve(omega_grid.size());
  for (double W : omega_grid) {
    if (W == 0.0) throw zero_frequency_pole("phase-noise spectrum diverges at Omega = 0");
    const double W2 = W * W;
    const double lorentz = K2 / (W2 * (K2 + W2));
    SpectrumSample s;
    s.omega = W;
    s.spin_term = lorentz * r.g * r.g * r.N * r.kappa_s / denom;
    s.cavity_term =
        lorentz * (0.25 * r.kappa_s * r.kappa_s + W2) * r.kappa_c * (1.0 + 2.0 * r.n_th) / denom;
    s.value = s.spin_term + s.cavity_term;
    out.push_back(s);
  }
  return out;
}

/// Log-spaced default grid, 1e-6 ... 10 times (kappa_c + kappa_s)/2.
inline std::vector<double> default_spectrum_grid(const DerivedRates& r, int points = 200) {
  const double K = 0.5 * (r.kappa_c + r.kappa_s);
  std::vector<double> grid(static_cast<std::size_t>(points));
  const double lo = std::log10(1e-6 * K), hi = std::log10(10.0 * K);
  for (int i = 0; i < points; ++i)
    grid[static_cast<std::size_t>(i)] =
        std::pow(10.0, points == 1 ? lo : lo + (hi - lo) * i / (points - 1));
  return grid;
}

/// Schawlow-Townes coefficient n_incoh kappa_c/(2 n_c) (kappa_s/(kappa_c+kappa_s))^2.
inline double diffusion_coefficient(double n_incoh, double n_c, double kappa_c, double kappa_s) {
  const double f = kappa_s / (kappa_c + kappa_s);
  return n_incoh * kappa_c / (2.0 * n_c) * f * f;
}

/// Coherence time 4 (1/kappa_c + 1/kappa_s)(n_c + n_s) / n_incoh.
inline double coherence_time(double n_incoh, double n_c, double n_s, double kappa_c,
                             double kappa_s) {
  return 4.0 * (1.0 / kappa_c + 1.0 / kappa_s) * (n_c + n_s) / n_incoh;
}

inline PhaseNoiseResult schawlow_townes(const DerivedRates& r, const CorrelationState& cs) {
  detail::require_masing(r, cs);
  PhaseNoiseResult pn;
  pn.n_incoh = r.n_th + cs.N_e / cs.S_z;
  pn.n_c = cs.n_coherent;
  pn.n_s = cs.n_s;
  pn.gamma_st = diffusion_coefficient(pn.n_incoh, pn.n_c, r.kappa_c, r.kappa_s);
  pn.T_coh = 2.0 / pn.gamma_st;
  pn.fwhm_linewidth = pn.gamma_st / constants::two_pi;
  return pn;
}

inline PhaseNoiseResult schawlow_townes(const DerivedRates& r) {
  return schawlow_townes(r, closure_steady_state(r));
}

struct CoherenceOptimum {
  double w_opt_analytic = 0.0;
  double T_coh_opt_analytic = 0.0;
  double w_opt_numeric = 0.0;
  double T_coh_opt_numeric = 0.0;
};

/// Best coherence time over the pump rate. r_at_w maps a pump rate to the
/// device rates at that pump. The analytic pair is the good-cavity estimate
/// w = 2 N g^2/(q kappa_c), T = 2 N^2 g^2/(q n_th kappa_c^3); the numeric pair
/// maximises the closure-based T_coh inside the masing window.
template <class RatesAtPump>
  requires std::invocable<RatesAtPump, double>
CoherenceOptimum optimal_coherence(RatesAtPump&& r_at_w) {
  const DerivedRates base = r_at_w(1.0);
  const auto window = masing_pump_window(base);
  if (!window) throw not_masing("no pump rate satisfies the masing condition");

  CoherenceOptimum opt;
  const double g2 = base.g * base.g;
  opt.w_opt_analytic = 2.0 * base.N * g2 / (base.q * base.kappa_c);
  opt.T_coh_opt_analytic =
      base.n_th > 0.0
          ? 2.0 * base.N * base.N * g2 /
                (base.q * base.n_th * base.kappa_c * base.kappa_c * base.kappa_c)
          : std::numeric_limits<double>::infinity();

  auto t_coh = [&](double w) {
    const DerivedRates r = r_at_w(w);
    if (!is_masing(r)) return 0.0;
    return schawlow_townes(r).T_coh;
  };
  auto [w, T] = detail::golden_max_log(t_coh, window->first, window->second);
  opt.w_opt_numeric = w;
  opt.T_coh_opt_numeric = T;
  return opt;
}

inline CoherenceOptimum optimal_coherence(const DerivedRates& r) {
  return optimal_coherence([&r](double w) { return r.with_pump(w); });
}

} // namespace maserlab
