#pragma once

#include <cmath>
#include <optional>
#include <string>

#include "maserlab/constants.hpp"
#include "maserlab/error.hpp"

namespace maserlab {

/// Raw device and physics inputs, in SI units except where the name says
/// otherwise (frequencies in Hz, magnetic field in Gauss).
///
/// Defaults are the room-temperature NV/diamond reference device: 3 GHz
/// Fabry-Perot cavity, 3x3x0.5 mm^3 diamond at 1e17 NV/cm^3, T2* = 0.5 us.
struct SystemParams {
  double nu_c = 3.0e9;           ///< cavity frequency, Hz
  double Q = 1.0e5;              ///< cavity quality factor
  double w = 1.0e5;              ///< per-spin optical pump rate, 1/s
  double T = 300.0;              ///< environment temperature, K
  double T2_star = 0.5e-6;       ///< ensemble dephasing time, s
  double gamma_eg = 200.0;       ///< spin-lattice relaxation rate, 1/s
  double q = 16.0;               ///< pump-induced magnon-decay multiplier
  double gamma_nv_per_2pi = 2.8e6; ///< gyromagnetic ratio, Hz/G
  double D_zfs = 2.87e9;         ///< zero-field splitting, Hz
  std::optional<double> B;       ///< applied field, G; absent means omega_s = omega_c
  double L = 0.05;               ///< cavity length, m
  double V_eff = 2.0e-6;         ///< effective mode volume, m^3
  double rho_nv = 1.0e23;        ///< NV concentration, 1/m^3
  double V_nv = 4.5e-9;          ///< diamond volume, m^3
  double orientation_divisor = 12.0;
  double kappa_ex_fraction = 1.0; ///< share of cavity decay into the I/O port

  /// Explicit single-spin coupling g/2pi in Hz. Overrides the mode-volume
  /// estimate when set.
  std::optional<double> g_hz;
  /// Explicit effective spin count. Overrides rho_nv * V_nv / divisor.
  std::optional<double> n_spins;
};

/// Reference parameter set of the contour maps: g/2pi = 0.02 Hz,
/// N = 0.375e14, T2* = 0.5 us, gamma_eg = 200 1/s, T = 300 K, 3 GHz.
inline SystemParams reference_params(double Q = 1.0e5, double w = 1.0e5) {
  SystemParams p;
  p.Q = Q;
  p.w = w;
  p.g_hz = 0.02;
  return p;
}

/// Rate-level quantities used by every model equation. Angular frequencies
/// in rad/s, rates in 1/s.
struct DerivedRates {
  double omega_c = 0.0;
  double omega_s = 0.0;
  double g = 0.0;          ///< single-spin coupling, rad/s
  double N = 0.0;          ///< effective spin count
  double kappa_c = 0.0;    ///< cavity decay
  double kappa_ex = 0.0;   ///< external-port decay
  double kappa_s = 0.0;    ///< magnon decay q w + 2/T2* + gamma_eg
  double n_th = 0.0;       ///< thermal photon number
  double gamma_eg = 0.0;
  double w = 0.0;
  double q = 0.0;
  double T2_star = 0.0;
  double gamma_nv = 0.0;   ///< rad s^-1 T^-1
  double L = 0.0;          ///< cavity length, m
  double T = 0.0;          ///< environment temperature, K
  double kappa_ex_fraction = 1.0;

  /// Same device at a different pump rate (kappa_s follows w).
  DerivedRates with_pump(double new_w) const {
    DerivedRates r = *this;
    r.w = new_w;
    r.kappa_s = magnon_decay(new_w, q, T2_star, gamma_eg);
    return r;
  }

  /// Same device with a different cavity decay (kappa_ex follows).
  DerivedRates with_cavity_decay(double new_kappa_c) const {
    DerivedRates r = *this;
    r.kappa_c = new_kappa_c;
    r.kappa_ex = kappa_ex_fraction * new_kappa_c;
    return r;
  }

  DerivedRates with_quality_factor(double Q) const { return with_cavity_decay(omega_c / Q); }

  double quality_factor() const { return omega_c / kappa_c; }

  /// Inversion of the uncoupled (dark) spins, N (w - gamma_eg)/(w + gamma_eg).
  double dark_inversion() const { return N * (w - gamma_eg) / (w + gamma_eg); }

  /// kappa_s kappa_c / (4 g^2): inversion clamped by a resonant maser.
  double clamped_inversion() const { return kappa_s * kappa_c / (4.0 * g * g); }

  static double magnon_decay(double w, double q, double T2_star, double gamma_eg) {
    return q * w + 2.0 / T2_star + gamma_eg;
  }
};

/// Result of the Zeeman tuning of the |-1> <-> |0> transition.
struct TransitionFrequency {
  double hz = 0.0;
  /// |-1> lies below |0>; needed for optical pumping to invert the pair.
  bool inverted_order = false;
};

/// |gamma_NV B - D| for the |-1> <-> |0> transition.
inline TransitionFrequency transition_frequency(double B_gauss, const SystemParams& p) {
  detail::require(B_gauss >= 0.0, "magnetic field must be non-negative");
  const double zeeman = p.gamma_nv_per_2pi * B_gauss;
  return {std::abs(zeeman - p.D_zfs), zeeman > p.D_zfs};
}

/// Bose-Einstein occupation of a mode at angular frequency omega.
inline double thermal_photons(double omega, double T) {
  if (T <= 0.0) return 0.0;
  const double x = constants::hbar * omega / (constants::k_boltzmann * T);
  // expm1 keeps precision in the Rayleigh-Jeans limit; overflow gives 0.
  return 1.0 / std::expm1(x);
}

/// Single-spin coupling from the mode volume,
/// g = gamma_NV sqrt(mu0 hbar omega_c / (2 V_eff)).
inline double mode_volume_coupling(double gamma_nv, double omega_c, double V_eff) {
  return gamma_nv * std::sqrt(constants::mu0 * constants::hbar * omega_c / (2.0 * V_eff));
}

inline void validate(const SystemParams& p) {
  using detail::require_positive;
  require_positive(p.nu_c, "nu_c");
  require_positive(p.Q, "Q");
  require_positive(p.w, "w");
  require_positive(p.T2_star, "T2_star");
  require_positive(p.gamma_eg, "gamma_eg");
  require_positive(p.q, "q");
  require_positive(p.gamma_nv_per_2pi, "gamma_nv_per_2pi");
  require_positive(p.D_zfs, "D_zfs");
  require_positive(p.L, "L");
  require_positive(p.V_eff, "V_eff");
  require_positive(p.rho_nv, "rho_nv");
  require_positive(p.V_nv, "V_nv");
  require_positive(p.orientation_divisor, "orientation_divisor");
  detail::require(p.T >= 0.0 && std::isfinite(p.T), "T must be finite and non-negative");
  detail::require(p.kappa_ex_fraction >= 0.0 && p.kappa_ex_fraction <= 1.0,
                  "kappa_ex_fraction must lie in [0, 1]");
  if (p.B) detail::require(*p.B >= 0.0, "B must be non-negative");
  if (p.g_hz) require_positive(*p.g_hz, "g_hz");
  if (p.n_spins) require_positive(*p.n_spins, "n_spins");
}

inline void validate(const DerivedRates& r) {
  using detail::require_positive;
  require_positive(r.omega_c, "omega_c");
  require_positive(r.omega_s, "omega_s");
  require_positive(r.N, "N");
  require_positive(r.kappa_c, "kappa_c");
  require_positive(r.kappa_s, "kappa_s");
  require_positive(r.gamma_eg, "gamma_eg");
  require_positive(r.w, "w");
  require_positive(r.T2_star, "T2_star");
  detail::require(r.g >= 0.0, "g must be non-negative");
  detail::require(r.n_th >= 0.0, "n_th must be non-negative");
  detail::require(r.kappa_ex >= 0.0 && r.kappa_ex <= r.kappa_c * (1.0 + 1e-15),
                  "kappa_ex must lie in [0, kappa_c]");
}

inline DerivedRates derive_rates(const SystemParams& p) {
  validate(p);
  using constants::two_pi;

  DerivedRates r;
  r.omega_c = two_pi * p.nu_c;
  r.omega_s = p.B ? two_pi * transition_frequency(*p.B, p).hz : r.omega_c;
  r.gamma_nv = two_pi * p.gamma_nv_per_2pi * constants::gauss_per_tesla;
  r.g = p.g_hz ? two_pi * *p.g_hz : mode_volume_coupling(r.gamma_nv, r.omega_c, p.V_eff);
  r.N = p.n_spins ? *p.n_spins : p.rho_nv * p.V_nv / p.orientation_divisor;
  r.kappa_c = r.omega_c / p.Q;
  r.kappa_ex_fraction = p.kappa_ex_fraction;
  r.kappa_ex = p.kappa_ex_fraction * r.kappa_c;
  r.kappa_s = DerivedRates::magnon_decay(p.w, p.q, p.T2_star, p.gamma_eg);
  r.n_th = thermal_photons(r.omega_c, p.T);
  r.gamma_eg = p.gamma_eg;
  r.w = p.w;
  r.q = p.q;
  r.T2_star = p.T2_star;
  r.L = p.L;
  r.T = p.T;
  if (!(r.omega_s > 0.0))
    throw invalid_parameter("spin transition frequency is zero (level crossing)");
  return r;
}

} // namespace maserlab
