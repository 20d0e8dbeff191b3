#include <gtest/gtest.h>

#include "maserlab/meanfield.hpp"
#include "oracles.hpp"

using namespace maserlab;

namespace {

DerivedRates rates(double Q = 1e5, double w = 1e5) {
  return derive_rates(reference_params(Q, w));
}

/// Shifts the spin frequency so the normalised mismatch equals delta.
DerivedRates detuned(DerivedRates r, double delta) {
  r.omega_s = r.omega_c - 0.5 * delta * (r.kappa_c + r.kappa_s);
  return r;
}

} // namespace

TEST(MeanField, ThresholdKappa) {
  const DerivedRates r = rates();
  EXPECT_NEAR(masing_threshold_kappa(r), 4.213e5, 0.001e5);
  EXPECT_NEAR(r.omega_c / masing_threshold_kappa(r), 4.47e4, 0.01e4);
  EXPECT_EQ(masing_threshold_kappa(r.with_pump(r.gamma_eg)), 0.0);
  DerivedRates uncoupled = r;
  uncoupled.g = 0.0;
  EXPECT_EQ(masing_threshold_kappa(uncoupled), 0.0);
}

TEST(MeanField, MasingPointMatchesHandEvaluation) {
  const DerivedRates r = rates();
  const MeanFieldState st = steady_state(r);
  const oracle::Device d;
  ASSERT_EQ(st.regime, MaserRegime::masing);
  EXPECT_NEAR(st.S_z, d.B(), 1e-9 * d.B());
  EXPECT_NEAR(st.S_z, 1.671e13, 0.001e13);
  const double nc = ((d.w - d.gamma) * d.N - (d.w + d.gamma) * d.B()) / (2 * d.kc());
  EXPECT_NEAR(st.n_c, nc, 1e-9 * nc);
  EXPECT_NEAR(st.n_c, 5.49e12, 0.01e12);
  EXPECT_DOUBLE_EQ(st.omega, r.omega_c);
  EXPECT_GT(st.a.real(), 0.0);
  EXPECT_EQ(st.a.imag(), 0.0);
  EXPECT_EQ(st.S_minus.real(), 0.0);
  EXPECT_GT(st.S_minus.imag(), 0.0);
}

TEST(MeanField, BelowThresholdIsDark) {
  const DerivedRates r = rates(1e4);
  const MeanFieldState st = steady_state(r);
  EXPECT_EQ(st.regime, MaserRegime::below_threshold);
  EXPECT_EQ(st.n_c, 0.0);
  EXPECT_EQ(st.a, complex{});
  EXPECT_EQ(st.S_minus, complex{});
  EXPECT_DOUBLE_EQ(st.S_z, r.N * (1e5 - 200) / (1e5 + 200));
}

TEST(MeanField, OverPumpedIsDark) {
  const DerivedRates r = rates(1e5, 6e5);
  EXPECT_NEAR(over_pump_limit(r), 5.35e5, 0.01e5);
  const MeanFieldState st = steady_state(r);
  EXPECT_EQ(st.regime, MaserRegime::over_pumped);
  EXPECT_EQ(st.n_c, 0.0);
  EXPECT_DOUBLE_EQ(st.S_z, r.dark_inversion());
}

TEST(MeanField, BalanceAndFluxInvariants) {
  auto g = oracle::rng(7);
  for (int i = 0; i < 50; ++i) {
    const double Q = oracle::log_uniform(g, 1e5, 1e7);
    const DerivedRates base = rates(Q);
    const auto win = masing_pump_window(base);
    ASSERT_TRUE(win);
    const DerivedRates r = base.with_pump(oracle::log_uniform(g, win->first * 1.01, win->second * 0.99));
    const MeanFieldState st = steady_state(r);
    ASSERT_EQ(st.regime, MaserRegime::masing);
    const double ksc = r.kappa_s * r.kappa_c;
    EXPECT_LE(std::abs(4 * r.g * r.g * st.S_z - ksc), 1e-9 * ksc);
    EXPECT_LE(oracle::rel(r.kappa_c * st.n_c, r.kappa_s * st.n_s), 1e-9);
    EXPECT_LE(meanfield_residual(r, st), 1e-9);
    EXPECT_GE(st.n_c, 0.0);
    EXPECT_GE(st.n_s, 0.0);
    EXPECT_LE(std::abs(st.S_z), r.N);
  }
}

TEST(MeanField, DetuningRaisesInversion) {
  const DerivedRates r0 = rates(1e7);
  const double S0 = steady_state(r0).S_z;
  for (double delta : {0.1, 1.0, 3.0}) {
    const DerivedRates r = detuned(r0, delta);
    const MeanFieldState st = steady_state(r);
    ASSERT_EQ(st.regime, MaserRegime::masing) << delta;
    EXPECT_NEAR(st.delta_cs, delta, 1e-12 * delta);
    EXPECT_LE(oracle::rel(st.S_z / S0, 1 + delta * delta), 1e-9);
    EXPECT_LE(meanfield_residual(r, st), 1e-9);
    EXPECT_LE(oracle::rel(r.kappa_c * st.n_c, r.kappa_s * st.n_s), 1e-9);
  }
}

TEST(MeanField, FrequencyDragging) {
  DerivedRates r = rates();
  EXPECT_DOUBLE_EQ(dragged_frequency(r), r.omega_c);
  r.kappa_c = r.kappa_s;
  r.omega_s = r.omega_c - 1e4;
  EXPECT_DOUBLE_EQ(dragged_frequency(r), 0.5 * (r.omega_c + r.omega_s));
}

TEST(MeanField, PhotonNumberVanishesAtThreshold) {
  const DerivedRates r = rates();
  const double kth = masing_threshold_kappa(r);
  auto nc = [&](double kc) { return steady_state(r.with_cavity_decay(kc)).n_c; };
  EXPECT_GT(nc(kth * (1 - 1e-6)), 0.0);
  EXPECT_EQ(nc(kth * (1 + 1e-6)), 0.0);
  // n_c falls continuously to zero: bisect its zero crossing.
  const double k0 =
      oracle::bisect([&](double kc) { return nc(kc) > 0 ? 1.0 : -1.0; }, 0.5 * kth, 2 * kth);
  EXPECT_LE(oracle::rel(k0, kth), 1e-6);
  EXPECT_LT(nc(kth * (1 - 1e-9)), 1e-6 * nc(0.5 * kth));
}

TEST(MeanField, GlobalPhaseLeavesResidualUnchanged) {
  const DerivedRates r = rates();
  const MeanFieldState st = steady_state(r);
  const double base = meanfield_residual(r, st);
  for (int k = 0; k < 8; ++k) {
    const complex ph = std::polar(1.0, constants::two_pi * k / 8.0);
    const double res = meanfield_residual(r, st.S_z, st.S_minus * ph, st.a * ph, st.omega);
    EXPECT_LE(res, 1e-9);
    EXPECT_NEAR(res, base, 1e-12);
  }
}

TEST(MeanField, PumpWindowEdgesAreThresholds) {
  const DerivedRates r = rates();
  const auto win = masing_pump_window(r);
  ASSERT_TRUE(win);
  EXPECT_FALSE(is_masing(r.with_pump(win->first * (1 - 1e-6))));
  EXPECT_TRUE(is_masing(r.with_pump(win->first * (1 + 1e-6))));
  EXPECT_TRUE(is_masing(r.with_pump(win->second * (1 - 1e-6))));
  EXPECT_FALSE(is_masing(r.with_pump(win->second * (1 + 1e-6))));
  EXPECT_FALSE(masing_pump_window(rates(1e3)));
}

TEST(MeanField, EqualityCountsAsBelowThreshold) {
  DerivedRates r = rates();
  r.kappa_c = r.dark_inversion() * 4 * r.g * r.g / r.kappa_s;
  // Nudge until clamped == dark exactly in floating point.
  for (int i = 0; i < 100 && r.clamped_inversion() < r.dark_inversion(); ++i)
    r.kappa_c = std::nextafter(r.kappa_c, 1e300);
  if (r.clamped_inversion() == r.dark_inversion()) {
    EXPECT_FALSE(is_masing(r));
  }
  EXPECT_EQ(steady_state(r).n_c, 0.0);
}

TEST(MeanField, InvalidRatesThrow) {
  DerivedRates r = rates();
  r.kappa_c = -1;
  EXPECT_THROW(steady_state(r), invalid_parameter);
}
