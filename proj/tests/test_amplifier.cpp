#include <gtest/gtest.h>

#include "maserlab/amplifier.hpp"
#include "oracles.hpp"

using namespace maserlab;

namespace {

DerivedRates rates(double Q = 1e5, double w = 1e5) {
  return derive_rates(reference_params(Q, w));
}

DriveSpec resonant(const DerivedRates& r, double P = 1e-15) { return {P, r.omega_c}; }

oracle::Device device(double Q, double w) {
  oracle::Device d;
  d.Q = Q;
  d.w = w;
  return d;
}

} // namespace

TEST(Amplifier, ReferenceGainAndNoiseTemperature) {
  const DerivedRates r = rates(4e4);
  const AmplifierSolution sol = drive_steady_state(r, resonant(r));
  const auto b = sol.stable_branch();
  ASSERT_TRUE(b.has_value());
  ASSERT_EQ(sol.branches.size(), 1u);
  EXPECT_NEAR(b->gain_db, 25.0, 0.05);
  EXPECT_NEAR(b->G, 319.3, 0.5);
  EXPECT_NEAR(b->T_n, 0.152, 0.0005);
  EXPECT_NEAR(b->S_z, 3.735e13, 0.001e13);
  EXPECT_DOUBLE_EQ(b->P_out, b->G * 1e-15);
  EXPECT_NEAR(sol.L_db, 6.83e-4, 0.01e-4);
  // Inverted and below threshold; the label is over-pumped since w > w_max here.
  EXPECT_TRUE(sol.regime == AmpRegime::amplifying || sol.regime == AmpRegime::over_pumped);
  EXPECT_LE(oracle::rel(weak_signal_gain(r), b->G), 0.01);
}

TEST(Amplifier, NoiseTemperatureByHand) {
  const DerivedRates r = rates(4e4);
  const double A = r.dark_inversion(), Ne = 0.5 * (r.N + A), G = 319.153;
  const double Ldb = 10 * r.kappa_c * 2 * 0.05 / 299792458.0 / std::log(10.0);
  const double ratio = Ldb / (10 * std::log10(G));
  const double quantum = oracle::h_planck * 3e9 / oracle::kB;
  const double Tn = (1 - 1 / G) * (ratio * 300 + (1 + ratio) * Ne / A * quantum);
  EXPECT_LE(oracle::rel(noise_temperature(G, r, A, Ne), Tn), 1e-9);
}

TEST(Amplifier, NoiseTemperatureLimits) {
  const DerivedRates r = rates(4e4);
  const double A = r.dark_inversion(), Ne = 0.5 * (r.N + A);
  EXPECT_EQ(noise_temperature(1.0, r, A, Ne), 0.0);
  EXPECT_THROW(noise_temperature(0.5, r, A, Ne), invalid_parameter);
  EXPECT_THROW(noise_temperature(10, r, 0.0, Ne), invalid_parameter);
  // Lossless cavity: only the spontaneous-emission floor is left.
  const DerivedRates lossless = r.with_cavity_decay(1e-12);
  const double floor = (1 - 1 / 100.0) * Ne / A * constants::hbar * r.omega_c / constants::k_boltzmann;
  EXPECT_LE(oracle::rel(noise_temperature(100.0, lossless, A, Ne), floor), 1e-9);
}

TEST(Amplifier, RootsMatchSignScanOracle) {
  struct Case {
    double Q, w, P, det;
  };
  for (const Case c : {Case{4e4, 1e5, 1e-15, 0}, Case{1e5, 1e5, 1e-15, 0}, Case{1e5, 1e3, 1e-12, 0},
                       Case{1e5, 100, 1e-15, 0}, Case{1e5, 5e5, 1e-15, 0}, Case{1e5, 1e5, 1e-15, 3e5},
                       Case{4e4, 1e5, 1e-9, 2e5}, Case{1e6, 3e4, 1e-14, 0}}) {
    const DerivedRates r = rates(c.Q, c.w);
    const AmplifierSolution sol = drive_steady_state(r, {c.P, r.omega_c + c.det});
    const auto ref = oracle::driven_roots(device(c.Q, c.w), c.P, 1.0, c.det);
    ASSERT_EQ(sol.branches.size(), ref.size()) << c.Q << " " << c.w << " " << c.det;
    for (std::size_t i = 0; i < ref.size(); ++i) {
      EXPECT_LE(oracle::rel(sol.branches[i].S_z, ref[i]), 1e-8) << c.Q << " " << c.w << " " << i;
      EXPECT_LE(std::abs(driven_inversion_residual(r, {c.P, r.omega_c + c.det}, sol.branches[i].S_z)),
                1e-9);
      EXPECT_LE(oracle::rel(sol.branches[i].G, oracle::gain(device(c.Q, c.w), ref[i], 1.0, c.det)),
                1e-6);
    }
  }
}

TEST(Amplifier, GainMatchesOracleWithPartialCoupling) {
  SystemParams p = reference_params(4e4);
  p.kappa_ex_fraction = 0.3;
  const DerivedRates r = derive_rates(p);
  for (double det : {0.0, 1e5, -4e5}) {
    const AmplifierSolution sol = drive_steady_state(r, {1e-15, r.omega_c + det});
    for (const auto& b : sol.branches)
      EXPECT_LE(oracle::rel(b.G, oracle::gain(device(4e4, 1e5), b.S_z, 0.3, det)), 1e-9) << det;
  }
}

TEST(Amplifier, WeakSignalInversionAccuracy) {
  for (double P : {1e-16, 1e-15, 1e-14}) {
    const DerivedRates r = rates(4e4);
    const DriveSpec d = resonant(r, P);
    const double exact = drive_steady_state(r, d).branches.at(0).S_z;
    const double A = r.dark_inversion();
    const double approx = weak_signal_inversion(r, d);
    EXPECT_LE(std::abs(approx - exact), 2 * std::abs(A - approx)) << P;
  }
}

TEST(Amplifier, MasingBranchEstimates) {
  const DerivedRates r = rates();
  const DriveSpec d = resonant(r);
  const AmplifierSolution sol = drive_steady_state(r, d);
  ASSERT_EQ(sol.regime, AmpRegime::masing);
  const auto b = sol.stable_branch();
  ASSERT_TRUE(b.has_value());
  EXPECT_LE(oracle::rel(b->S_z, masing_branch_inversion(r, d)), 1e-6);
  EXPECT_LE(oracle::rel(b->G, masing_branch_gain(r, d)), 1e-3);
  EXPECT_NEAR(b->P_out, 2.06e-6, 0.01e-6);
}

TEST(Amplifier, LinearInWeakInput) {
  const DerivedRates ra = rates(4e4);
  const double G1 = drive_steady_state(ra, resonant(ra, 1e-15)).stable_branch()->G;
  const DerivedRates rm = rates();
  const double P1 = drive_steady_state(rm, resonant(rm, 1e-15)).stable_branch()->P_out;
  for (double P : {1e-16, 1e-14}) {
    EXPECT_LE(oracle::rel(drive_steady_state(ra, resonant(ra, P)).stable_branch()->G, G1), 0.01);
    const auto b = drive_steady_state(rm, resonant(rm, P)).stable_branch();
    EXPECT_LE(oracle::rel(b->P_out, P1), 0.01);
    EXPECT_LE(oracle::rel(b->G, masing_branch_gain(rm, resonant(rm, P))), 1e-3);
  }
}

TEST(Amplifier, StabilityPartitionAlongPump) {
  const DerivedRates base = rates();
  for (double w : {100.0, 150.0, 300.0, 1e3, 1e4, 1e5, 3e5, 5e5, 6e5, 1e6}) {
    const DerivedRates r = base.with_pump(w);
    const AmplifierSolution sol = drive_steady_state(r, resonant(r));
    int stable = 0;
    for (const auto& b : sol.branches) stable += b.stable;
    EXPECT_EQ(stable, 1) << w;
    if (sol.regime == AmpRegime::masing) {
      EXPECT_EQ(sol.branches.size(), 3u) << w;
      EXPECT_TRUE(sol.branches[0].stable) << w; // lowest inversion is the maser
    } else {
      EXPECT_EQ(sol.branches.size(), 1u) << w;
    }
  }
}

TEST(Amplifier, OffResonanceGainIsOrderOne) {
  DerivedRates r = rates(4e4);
  // Both detunings equal their linewidths.
  r.omega_s = r.omega_c + r.kappa_c - r.kappa_s;
  const AmplifierSolution sol = drive_steady_state(r, {1e-15, r.omega_c + r.kappa_c});
  ASSERT_TRUE(sol.stable_branch().has_value());
  EXPECT_GT(sol.stable_branch()->G, 0.1);
  EXPECT_LT(sol.stable_branch()->G, 10.0);
}

TEST(Amplifier, UninvertedSpinsDoNotAmplify) {
  for (double w : {10.0, 100.0, 150.0}) {
    const DerivedRates r = rates(1e5, w);
    EXPECT_EQ(classify_regime(r), AmpRegime::absorbing);
    EXPECT_LE(drive_steady_state(r, resonant(r)).stable_branch()->G, 1.0);
    EXPECT_THROW(weak_signal_gain(r), regime_error);
  }
}

TEST(Amplifier, ZeroInversionIsTransparent) {
  const DerivedRates r = rates(1e5, 200);
  const AmplifierBranch b = drive_steady_state(r, resonant(r)).branches.at(0);
  EXPECT_LE(std::abs(b.S_z), 1e-6 * r.N);
  EXPECT_NEAR(b.G, 1.0, 1e-6);
}

TEST(Amplifier, TransmissionSignFlipsAtPerfectAbsorption) {
  // s_out = s_in ((1 - x) - 2) / (1 - x) at resonance with kappa_ex = kappa_c.
  const DerivedRates r = rates();
  const auto out = [&](double w) {
    const DerivedRates rw = r.with_pump(w);
    return drive_steady_state(rw, resonant(rw)).branches.at(0);
  };
  const AmplifierBranch lo = out(100), hi = out(150);
  EXPECT_GT(lo.s_out.real(), 0.0);
  EXPECT_LT(hi.s_out.real(), 0.0);
  const double w0 = oracle::bisect([&](double w) { return out(w).s_out.real(); }, 100, 150);
  const AmplifierBranch z = out(w0);
  EXPECT_LT(z.G, 1e-6);
  EXPECT_NEAR(z.S_z / -r.with_pump(w0).clamped_inversion(), 1.0, 1e-4);
}

TEST(WeakSignalGain, ClosedForm) {
  const DerivedRates r = rates(4e4);
  const double A = r.dark_inversion(), B = r.clamped_inversion();
  EXPECT_LE(oracle::rel(weak_signal_gain(r), (A + B) * (A + B) / ((A - B) * (A - B))), 1e-12);
  EXPECT_NEAR(10 * std::log10(weak_signal_gain(r)), 25.0, 0.05);
}

TEST(WeakSignalGain, FarBelowThreshold) {
  EXPECT_NEAR(10 * std::log10(weak_signal_gain(rates(1e3, 2000))), 0.443, 0.001);
  EXPECT_NEAR(10 * std::log10(weak_signal_gain(rates(1, 2000))), 0.0, 1e-3);
}

TEST(WeakSignalGain, ThresholdPoleAndMasingThrow) {
  EXPECT_THROW(weak_signal_gain(rates()), regime_error);
  DerivedRates r = rates(4e4);
  r.kappa_c = 4 * r.g * r.g * r.dark_inversion() / r.kappa_s;
  for (int i = 0; i < 100 && r.clamped_inversion() != r.dark_inversion(); ++i)
    r.kappa_c = std::nextafter(r.kappa_c, r.clamped_inversion() < r.dark_inversion() ? 1e300 : 0.0);
  if (r.clamped_inversion() == r.dark_inversion()) {
    EXPECT_THROW(weak_signal_gain(r), regime_error);
  }
}

TEST(Regime, ReferenceExamples) {
  EXPECT_EQ(classify_regime(rates(1e5, 100)), AmpRegime::absorbing);
  EXPECT_EQ(classify_regime(rates(1e5, 1e5)), AmpRegime::masing);
  EXPECT_EQ(classify_regime(rates(1e5, 6e5)), AmpRegime::over_pumped);
  EXPECT_EQ(classify_regime(rates(1e3, 1e5)), AmpRegime::amplifying);
  EXPECT_EQ(to_string(AmpRegime::over_pumped), "over-pumped");
}

TEST(Amplifier, UndrivenReturnsDarkState) {
  const DerivedRates r = rates();
  const AmplifierSolution sol = drive_steady_state(r, resonant(r, 0.0));
  ASSERT_EQ(sol.branches.size(), 1u);
  EXPECT_DOUBLE_EQ(sol.branches[0].S_z, r.dark_inversion());
  EXPECT_EQ(sol.branches[0].P_out, 0.0);
  EXPECT_THROW(drive_steady_state(r, {-1.0, r.omega_c}), invalid_parameter);
}

TEST(Amplifier, RoundtripQuantities) {
  const DerivedRates r = rates();
  EXPECT_NEAR(roundtrip_time(r), 0.1 / 299792458.0, 1e-20);
  EXPECT_NEAR(roundtrip_loss_db(r), -10 * std::log10(std::exp(-r.kappa_c * roundtrip_time(r))), 1e-15);
}
