// Walks one operating point through every module.

#include <cstdio>

#include "maserlab/maserlab.hpp"

int main() {
  using namespace maserlab;
  const DerivedRates r = derive_rates(reference_params(1e5, 1e5));
  std::printf("kappa_c = %.4g /s, kappa_s = %.4g /s, n_th = %.1f\n", r.kappa_c, r.kappa_s, r.n_th);

  const MeanFieldState mf = steady_state(r);
  std::printf("mean field: S_z = %.4g, n_c = %.4g\n", mf.S_z, mf.n_c);

  const PhaseNoiseResult pn = schawlow_townes(r);
  const SensitivityResult s = sensitivities(r, pn);
  std::printf("T_coh = %.4g s, linewidth = %.3g uHz\n", pn.T_coh, pn.fwhm_linewidth * 1e6);
  std::printf("dB = %.3g pT/rtHz, dx = %.3g fm/rtHz\n", s.delta_b_sqrt_tm * 1e12,
              s.delta_x_sqrt_tm * 1e15);

  const DerivedRates ra = r.with_quality_factor(4e4);
  if (const auto b = drive_steady_state(ra, {1e-15, ra.omega_c}).stable_branch())
    std::printf("Q = 4e4 amplifier: %.2f dB, T_n = %.1f mK\n", b->gain_db, b->T_n * 1e3);

  const DynamicsTrace tr = integrate(r, seeded_dark_state(r, 1));
  std::printf("integrated to t = %.3g s: S_z = %.4g (%s)\n", tr.t.back(), tr.final_state().S_z(),
              tr.converged ? "converged" : "not converged");
}
