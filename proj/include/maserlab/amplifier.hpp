#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

#include "maserlab/detail/cubic.hpp"
#include "maserlab/dynamics.hpp"

namespace maserlab {

enum class AmpRegime { absorbing, amplifying, masing, over_pumped };

inline std::string_view to_string(AmpRegime r) {
  switch (r) {
  case AmpRegime::absorbing: return "absorbing";
  case AmpRegime::amplifying: return "amplifying";
  case AmpRegime::masing: return "masing";
  case AmpRegime::over_pumped: return "over-pumped";
  }
  return "?";
}

inline AmpRegime classify_regime(const DerivedRates& r) {
  if (r.w <= r.gamma_eg) return AmpRegime::absorbing;
  if (is_over_pumped(r)) return AmpRegime::over_pumped;
  if (is_masing(r)) return AmpRegime::masing;
  return AmpRegime::amplifying;
}

struct AmplifierBranch {
  double S_z = 0.0;
  double G = 0.0;       ///< |s_out|^2 / |s_in|^2
  double gain_db = 0.0;
  complex s_out{};      ///< sqrt(photons/s); s_in is real and positive
  double T_n = std::numeric_limits<double>::quiet_NaN(); ///< K, defined for G >= 1, S_z > 0
  double P_out = 0.0;   ///< W
  double n_c = 0.0;     ///< intracavity photons |a|^2
  bool stable = false;
  ModelState state;     ///< fixed point in the frame of the drive
};

struct AmplifierSolution {
  std::vector<AmplifierBranch> branches; ///< ascending S_z
  AmpRegime regime = AmpRegime::absorbing;
  double L_db = 0.0;  ///< roundtrip loss
  double tau_rt = 0.0; ///< roundtrip time, s

  /// The unique stable branch, if there is exactly one.
  /// The unique stable branch, by value so it outlives a temporary solution.
  std::optional<AmplifierBranch> stable_branch() const {
    std::optional<AmplifierBranch> found;
    for (const auto& b : branches)
      if (b.stable) {
        if (found) return std::nullopt;
        found = b;
      }
    return found;
  }
};

inline double roundtrip_time(const DerivedRates& r) { return 2.0 * r.L / constants::speed_of_light; }

/// -10 log10(exp(-kappa_c tau_rt)).
inline double roundtrip_loss_db(const DerivedRates& r) {
  return 10.0 * r.kappa_c * roundtrip_time(r) / std::log(10.0);
}

/// Intrinsic noise temperature of an amplifier with power gain G.
inline double noise_temperature(double G, const DerivedRates& r, double S_z, double N_e) {
  if (!(G >= 1.0)) throw invalid_parameter("noise temperature needs G >= 1");
  if (!(S_z > 0.0)) throw invalid_parameter("noise temperature needs S_z > 0");
  if (G == 1.0) return 0.0;
  const double ratio = roundtrip_loss_db(r) / (10.0 * std::log10(G));
  const double quantum = constants::hbar * r.omega_c / constants::k_boltzmann;
  return (1.0 - 1.0 / G) * (ratio * r.T + (1.0 + ratio) * (N_e / S_z) * quantum);
}

/// Small-signal resonant gain ((1 - r - x)/(1 - x))^2, x = A/B,
/// r = 2 kappa_ex/kappa_c; (A+B)^2/(A-B)^2 for an overcoupled port.
/// Over-pumped points are inverted and below threshold, so they amplify too.
inline double weak_signal_gain(const DerivedRates& r) {
  const auto reg = classify_regime(r);
  if (reg != AmpRegime::amplifying && reg != AmpRegime::over_pumped)
    throw regime_error("weak-signal gain needs an inverted, non-masing operating point");
  const double A = r.dark_inversion(), B = r.clamped_inversion();
  if (A == B) throw regime_error("at the masing threshold the small-signal gain diverges");
  const double x = A / B, rr = 2.0 * r.kappa_ex / r.kappa_c;
  const double t = (1.0 - rr - x) / (1.0 - x);
  return t * t;
}

/// Weak-signal inversion A (1 - 8 s B / ((w + gamma)(A - B)^2)), s = photon flux.
inline double weak_signal_inversion(const DerivedRates& r, const DriveSpec& d) {
  const double A = r.dark_inversion(), B = r.clamped_inversion();
  const double s = d.photon_flux() * r.kappa_ex / r.kappa_c;
  return A * (1.0 - 8.0 * s * B / ((r.w + r.gamma_eg) * (A - B) * (A - B)));
}

/// Strong-inversion masing branch B (1 - 2 sqrt(2 s / ((w + gamma)(A - B)))).
inline double masing_branch_inversion(const DerivedRates& r, const DriveSpec& d) {
  const double A = r.dark_inversion(), B = r.clamped_inversion();
  if (!(A > B)) throw regime_error("masing-branch estimate needs A > B");
  const double s = d.photon_flux() * r.kappa_ex / r.kappa_c;
  return B * (1.0 - 2.0 * std::sqrt(2.0 * s / ((r.w + r.gamma_eg) * (A - B))));
}

/// Gain on the masing branch, (sqrt((w + gamma)(A - B) / (2 s)) - 1)^2,
/// which is (2B/(B - S_z) - 1)^2 at the masing_branch_inversion estimate.
inline double masing_branch_gain(const DerivedRates& r, const DriveSpec& d) {
  const double A = r.dark_inversion(), B = r.clamped_inversion();
  if (!(A > B)) throw regime_error("masing-branch estimate needs A > B");
  const double s = d.photon_flux() * r.kappa_ex / r.kappa_c;
  const double t = std::sqrt((r.w + r.gamma_eg) * (A - B) / (2.0 * s)) - 1.0;
  return t * t;
}

namespace detail {

/// Driven steady-state inversion cubic in y = beta' - S_z/N, with
/// beta' = Re(D_c D_s)/(g^2 N), pi = Im(D_c D_s)/(g^2 N):
/// (alpha - beta' + y)(y^2 + pi^2) = eps (beta' - y).
struct DrivenCubic {
  double alpha, beta, pi, eps;

  DrivenCubic(const DerivedRates& r, const DriveSpec& d) {
    const complex Ds(0.5 * r.kappa_s, -(d.omega_in - r.omega_s));
    const complex Dc(0.5 * r.kappa_c, -(d.omega_in - r.omega_c));
    const complex P = Dc * Ds;
    const double g2N = r.g * r.g * r.N;
    alpha = r.dark_inversion() / r.N;
    beta = P.real() / g2N;
    pi = P.imag() / g2N;
    eps = 2.0 * r.kappa_s * r.kappa_ex * d.photon_flux() /
          ((r.w + r.gamma_eg) * r.g * r.g * r.N * r.N);
  }

  double residual(double y) const {
    return (alpha - beta + y) * (y * y + pi * pi) - eps * (beta - y);
  }

  std::vector<double> roots_y() const {
    const double dd = alpha - beta, p2 = pi * pi;
    return real_cubic_roots(dd, p2 + eps, dd * p2 - eps * beta);
  }
};

} // namespace detail

/// Backward error of S_z as a root of the inversion cubic: the residual over
/// the sum of the magnitudes of its expanded terms. alpha and beta count
/// separately because alpha - beta cancels near the threshold.
inline double driven_inversion_residual(const DerivedRates& r, const DriveSpec& d, double S_z) {
  const detail::DrivenCubic c(r, d);
  const double y = c.beta - S_z / r.N;
  const double ay = std::abs(y), p2 = c.pi * c.pi, ab = std::abs(c.alpha) + std::abs(c.beta);
  const double scale = ay * ay * ay + ab * ay * ay + (p2 + c.eps) * ay + ab * p2 +
                       c.eps * std::abs(c.beta);
  return c.residual(y) / std::max(scale, 1e-300);
}

/// Fixed point of the driven system for a given inversion.
inline ModelState driven_fixed_point(const DerivedRates& r, const DriveSpec& d, double S_z) {
  const complex I(0.0, 1.0);
  const complex Ds(0.5 * r.kappa_s, -(d.omega_in - r.omega_s));
  const complex Dc(0.5 * r.kappa_c, -(d.omega_in - r.omega_c));
  const double s_in = std::sqrt(d.photon_flux());
  ModelState st;
  st.N_e = 0.5 * (r.N + S_z);
  st.N_g = 0.5 * (r.N - S_z);
  st.a = std::sqrt(r.kappa_ex) * s_in * Ds / (Dc * Ds - r.g * r.g * S_z);
  st.S_minus = I * r.g * S_z * st.a / Ds;
  return st;
}

/// Steady states of the maser driven at P_in, omega_in. Every real root of
/// the inversion cubic is returned with its gain and a Jacobian stability
/// label.
inline AmplifierSolution drive_steady_state(const DerivedRates& r, const DriveSpec& d) {
  validate(r);
  validate(d);
  AmplifierSolution sol;
  sol.regime = classify_regime(r);
  sol.tau_rt = roundtrip_time(r);
  sol.L_db = roundtrip_loss_db(r);

  const detail::DrivenCubic cubic(r, d);
  std::vector<double> ys;
  if (cubic.eps == 0.0)
    ys = {cubic.beta - cubic.alpha}; // undriven: only the dark state is a fixed point
  else
    ys = cubic.roots_y();

  const double s_in = std::sqrt(d.photon_flux());
  for (auto it = ys.rbegin(); it != ys.rend(); ++it) { // descending y = ascending S_z
    AmplifierBranch b;
    b.S_z = r.N * (cubic.beta - *it);
    b.state = driven_fixed_point(r, d, b.S_z);
    b.n_c = std::norm(b.state.a);

    // s_out/s_in from the closed form, so it stays finite at P_in = 0.
    const complex Ds(0.5 * r.kappa_s, -(d.omega_in - r.omega_s));
    const complex Dc(0.5 * r.kappa_c, -(d.omega_in - r.omega_c));
    const complex t = 1.0 - r.kappa_ex * Ds / (Dc * Ds - r.g * r.g * b.S_z);
    b.G = std::norm(t);
    b.gain_db = 10.0 * std::log10(b.G);
    b.s_out = t * s_in;
    b.P_out = b.G * d.P_in;
    if (b.G >= 1.0 && b.S_z > 0.0) b.T_n = noise_temperature(b.G, r, b.S_z, b.state.N_e);

    b.stable = jacobian_stability(r, b.state, d).stable;
    sol.branches.push_back(b);
  }
  return sol;
}

} // namespace maserlab
