#pragma once

#include <algorithm>
#include <cmath>

#include "maserlab/linewidth.hpp"

namespace maserlab {

struct SensitivityResult {
  double delta_b_sqrt_tm = 0.0; ///< T Hz^-1/2
  double delta_x_sqrt_tm = 0.0; ///< m Hz^-1/2
  double omega_max_B = 0.0;     ///< rad/s
  double omega_max_x = 0.0;     ///< rad/s

  double delta_b_gauss() const { return delta_b_sqrt_tm * constants::gauss_per_tesla; }
};

inline double tesla_to_gauss(double t) { return t * constants::gauss_per_tesla; }
inline double gauss_to_tesla(double g) { return g / constants::gauss_per_tesla; }

/// delta_B sqrt(t_m) = (1 + kappa_s/kappa_c) sqrt(gamma_ST) / gamma_NV.
inline double magnetic_sensitivity(const DerivedRates& r, const PhaseNoiseResult& pn) {
  if (!is_masing(r) || !(pn.gamma_st > 0.0)) throw not_masing("sensitivity requires masing");
  return (1.0 + r.kappa_s / r.kappa_c) * std::sqrt(pn.gamma_st) / r.gamma_nv;
}

/// Same with the photon shot-noise term kept at analysis frequency Omega.
inline double magnetic_sensitivity(const DerivedRates& r, const PhaseNoiseResult& pn,
                                   double Omega) {
  if (!is_masing(r) || !(pn.gamma_st > 0.0)) throw not_masing("sensitivity requires masing");
  const double ksum = r.kappa_c + r.kappa_s;
  const double W2 = Omega * Omega;
  const double shot = W2 / (4.0 * r.kappa_c * pn.n_c) * (1.0 + 4.0 * W2 / (ksum * ksum));
  return ksum / r.kappa_c * std::sqrt(shot + pn.gamma_st) / r.gamma_nv;
}

/// delta_x sqrt(t_m) = (L/omega_c)(1 + kappa_c/kappa_s) sqrt(gamma_ST).
inline double displacement_sensitivity(const DerivedRates& r, const PhaseNoiseResult& pn) {
  if (!is_masing(r) || !(pn.gamma_st > 0.0)) throw not_masing("sensitivity requires masing");
  return r.L / r.omega_c * (1.0 + r.kappa_c / r.kappa_s) * std::sqrt(pn.gamma_st);
}

/// Upper ends of the slow-noise window in which the closed forms hold.
inline double slow_noise_corner(const DerivedRates& r, const PhaseNoiseResult& pn) {
  return std::sqrt(2.0 * pn.n_incoh) * r.kappa_c * r.kappa_s / (r.kappa_c + r.kappa_s);
}

inline SensitivityResult sensitivities(const DerivedRates& r, const PhaseNoiseResult& pn) {
  SensitivityResult s;
  s.delta_b_sqrt_tm = magnetic_sensitivity(r, pn);
  s.delta_x_sqrt_tm = displacement_sensitivity(r, pn);
  const double corner = slow_noise_corner(r, pn);
  s.omega_max_B = std::min(corner, 0.5 * (r.kappa_c + r.kappa_s));
  s.omega_max_x = std::min(corner, 0.5 * r.kappa_s);
  return s;
}

inline SensitivityResult sensitivities(const DerivedRates& r) {
  return sensitivities(r, schawlow_townes(r));
}

enum class NoiseMode { magnetic, displacement };

struct OutputNoise {
  double total = 0.0;
  double shot = 1.0;
  double background = 0.0; ///< linewidth (phase diffusion) term
  double signal = 0.0;     ///< injected-noise term
};

/// Output-field noise density at offset Omega with an injected white
/// frequency noise: delta_B sqrt(t_m) in T Hz^-1/2 (magnetic) or
/// delta_x sqrt(t_m) in m Hz^-1/2 (displacement).
inline OutputNoise output_noise_spectrum(const DerivedRates& r, const CorrelationState& cs,
                                         NoiseMode mode, double Omega, double injected) {
  detail::require_masing(r, cs);
  if (Omega == 0.0) throw zero_frequency_pole("output noise diverges at Omega = 0");
  const double n_c = cs.n_coherent;
  const double n_incoh = r.n_th + cs.N_e / cs.S_z;
  const double K = 0.5 * (r.kappa_c + r.kappa_s);
  const double W2 = Omega * Omega;
  const double lor = 1.0 / (K * K + W2);
  const double pre = 4.0 * r.kappa_c * n_c / W2;
  const double hs2 = 0.25 * r.kappa_s * r.kappa_s;

  OutputNoise out;
  out.background = pre * hs2 * lor * n_incoh * r.kappa_c / (2.0 * n_c);
  if (mode == NoiseMode::magnetic) {
    const double dw = r.gamma_nv * injected;
    out.signal = pre * 0.25 * r.kappa_c * r.kappa_c * lor * dw * dw;
  } else {
    const double dw = r.omega_c * injected / r.L;
    out.signal = pre * (hs2 + W2) * lor * dw * dw;
  }
  out.total = out.shot + out.background + out.signal;
  return out;
}

} // namespace maserlab
