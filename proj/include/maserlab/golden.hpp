#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "maserlab/amplifier.hpp"
#include "maserlab/sensitivity.hpp"

namespace maserlab {

struct GoldenCheck {
  std::string name;
  double value = 0.0;
  double lo = 0.0, hi = 0.0;
  bool pass() const { return value >= lo && value <= hi; }
};

/// Headline operating points of the reference device: 3 GHz, 300 K,
/// g/2pi = 0.02 Hz, N = 3.75e13.
inline std::vector<GoldenCheck> golden_checks() {
  std::vector<GoldenCheck> out;
  const DerivedRates r = derive_rates(reference_params(1e5, 1e5));
  const PhaseNoiseResult pn = schawlow_townes(r);
  const SensitivityResult s = sensitivities(r, pn);
  out.push_back({"n_th (300 K, 3 GHz)", r.n_th, 2040, 2130});
  out.push_back({"T_coh [s] at Q=1e5, w=1e5", pn.T_coh, 5.7e4, 6.3e4});
  out.push_back({"FWHM [uHz]", pn.fwhm_linewidth * 1e6, 4.5, 6.0});
  out.push_back({"dB [pT/rtHz]", s.delta_b_sqrt_tm * 1e12, 0.95, 1.10});
  out.push_back({"dx [fm/rtHz]", s.delta_x_sqrt_tm * 1e15, 15.2, 16.8});
  out.push_back({"w_max [1/s] at Q=1e5", over_pump_limit(r), 5.30e5, 5.40e5});
  out.push_back({"threshold Q at w=1e5", r.omega_c / masing_threshold_kappa(r), 4.3e4, 4.7e4});

  const DerivedRates ra = derive_rates(reference_params(4e4, 1e5));
  const AmplifierSolution sol = drive_steady_state(ra, {1e-15, ra.omega_c});
  const auto b = sol.stable_branch();
  out.push_back({"gain [dB] at Q=4e4, 1 fW", b ? b->gain_db : NAN, 24.5, 25.5});
  out.push_back({"T_n [mK]", b ? b->T_n * 1e3 : NAN, 147, 157});
  return out;
}

} // namespace maserlab
