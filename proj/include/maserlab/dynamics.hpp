#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "maserlab/detail/dopri.hpp"
#include "maserlab/drive.hpp"
#include "maserlab/meanfield.hpp"

namespace maserlab {

/// Mean-field state in physical units, rotating frame.
struct ModelState {
  double N_e = 0.0;
  double N_g = 0.0;
  complex S_minus{};
  complex a{};

  double S_z() const { return N_e - N_g; }
};

inline ModelState from_meanfield(const DerivedRates& r, const MeanFieldState& st) {
  return {0.5 * (r.N + st.S_z), 0.5 * (r.N - st.S_z), st.S_minus, st.a};
}

/// Dark populations N(w - gamma)/(w + gamma) with a seed S- of magnitude
/// `magnitude` (default sqrt(N)) and a random phase.
inline ModelState seeded_dark_state(const DerivedRates& r, std::uint64_t seed,
                                    std::optional<double> magnitude = std::nullopt) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, constants::two_pi);
  const double A = r.dark_inversion();
  ModelState s{0.5 * (r.N + A), 0.5 * (r.N - A), {}, {}};
  s.S_minus = std::polar(magnitude.value_or(std::sqrt(r.N)), phase(rng));
  return s;
}

namespace detail {

using Vec6 = std::array<double, 6>;

/// Scaled coordinates: populations / N, S- / N, a / sqrt(N).
struct ScaledModel {
  double G;        ///< collective coupling g sqrt(N)
  double w, gamma, ks, kc;
  double det_s, det_c; ///< frame minus spin / cavity frequency
  double drive;        ///< sqrt(kappa_ex) s_in / sqrt(N), real
  double N;

  ScaledModel(const DerivedRates& r, std::optional<DriveSpec> d, double frame)
      : G(r.g * std::sqrt(r.N)), w(r.w), gamma(r.gamma_eg), ks(r.kappa_s), kc(r.kappa_c),
        det_s(frame - r.omega_s), det_c(frame - r.omega_c),
        drive(d ? std::sqrt(r.kappa_ex * d->photon_flux() / r.N) : 0.0), N(r.N) {}

  void operator()(double, const Vec6& y, Vec6& f) const {
    const double ne = y[0], ng = y[1], sr = y[2], si = y[3], ar = y[4], ai = y[5];
    const double z = ne - ng;
    const double flow = 2.0 * G * (ar * si - ai * sr); // 2 G Im(alpha* s)
    const double pump = w * ng - gamma * ne;
    f[0] = pump - flow;
    f[1] = -pump + flow;
    f[2] = -det_s * si - 0.5 * ks * sr - G * z * ai;
    f[3] = det_s * sr - 0.5 * ks * si + G * z * ar;
    f[4] = -det_c * ai - 0.5 * kc * ar + G * si + drive;
    f[5] = det_c * ar - 0.5 * kc * ai - G * sr;
  }

  double rate_ref() const { return kc + ks + w + gamma; }

  Vec6 scale(const ModelState& s) const {
    const double sq = std::sqrt(N);
    return {s.N_e / N, s.N_g / N, s.S_minus.real() / N, s.S_minus.imag() / N,
            s.a.real() / sq, s.a.imag() / sq};
  }

  ModelState unscale(const Vec6& y) const {
    const double sq = std::sqrt(N);
    return {y[0] * N, y[1] * N, complex(y[2], y[3]) * N, complex(y[4], y[5]) * sq};
  }

  /// max over (populations, spin, field) of |f| / (rate_ref max(|y|, 1e-6)).
  double residual(const Vec6& y) const {
    Vec6 f;
    (*this)(0.0, y, f);
    auto grp = [&](int i) {
      const double ny = std::max(std::hypot(y[i], y[i + 1]), 1e-6);
      return std::hypot(f[i], f[i + 1]) / (rate_ref() * ny);
    };
    return std::max({grp(0), grp(2), grp(4)});
  }
};

inline double frame_frequency(const DerivedRates& r, const std::optional<DriveSpec>& d,
                              std::optional<double> frame) {
  if (d) return d->omega_in;
  return frame.value_or(dragged_frequency(r));
}

} // namespace detail

/// Relative drift of a state (see ScaledModel::residual). The frame is the
/// drive frequency when driven, else `frame` or the dragged frequency.
inline double drift_residual(const DerivedRates& r, const ModelState& s,
                             std::optional<DriveSpec> drive = std::nullopt,
                             std::optional<double> frame = std::nullopt) {
  const detail::ScaledModel m(r, drive, detail::frame_frequency(r, drive, frame));
  return m.residual(m.scale(s));
}

struct IntegrateOptions {
  std::optional<double> t_end;  ///< default 50 max(1/kappa_c, 1/gamma_eg, 1/w)
  std::optional<double> frame;  ///< rotating-frame frequency, undriven only
  double rtol = 1e-10;
  double atol = 1e-14;          ///< scaled units
  double convergence_tol = 1e-8;
  bool stop_when_converged = true;
  std::size_t record_every = 1;
};

struct DynamicsTrace {
  std::vector<double> t;
  std::vector<ModelState> states;
  bool converged = false;
  double final_residual = 0.0;
  bool stiffness_detected = false;
  long accepted_steps = 0;
  long rejected_steps = 0;

  const ModelState& final_state() const { return states.back(); }

  void write_csv(std::ostream& os) const {
    os << "t,N_e,N_g,re_S_minus,im_S_minus,re_a,im_a\n";
    char buf[512];
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& s = states[i];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", t[i], s.N_e,
                    s.N_g, s.S_minus.real(), s.S_minus.imag(), s.a.real(), s.a.imag());
      os << buf;
    }
  }
};

inline double default_t_end(const DerivedRates& r) {
  return 50.0 * std::max({1.0 / r.kappa_c, 1.0 / r.gamma_eg, 1.0 / r.w});
}

/// Integrates the deterministic mean-field equations from init.
inline DynamicsTrace integrate(const DerivedRates& r, const ModelState& init,
                               std::optional<DriveSpec> drive = std::nullopt,
                               const IntegrateOptions& opt = {}) {
  validate(r);
  if (drive) validate(*drive);
  const double t_end = opt.t_end.value_or(default_t_end(r));
  detail::require_positive(t_end, "t_end");
  detail::require(init.N_e >= 0.0 && init.N_g >= 0.0, "initial populations must be >= 0");
  detail::require(std::abs(init.N_e + init.N_g - r.N) <= 1e-9 * r.N,
                  "initial populations must sum to N");

  const detail::ScaledModel m(r, drive, detail::frame_frequency(r, drive, opt.frame));
  detail::Vec6 y = m.scale(init);

  DynamicsTrace tr;
  tr.t.push_back(0.0);
  tr.states.push_back(init);
  const std::size_t stride = std::max<std::size_t>(opt.record_every, 1);
  std::size_t since = 0;
  double last_t = 0.0;
  bool last_recorded = true;

  detail::DopriOptions dop;
  dop.rtol = opt.rtol;
  dop.atol = opt.atol;
  const auto st = detail::dopri5(m, y, 0.0, t_end, dop, [&](double t, const detail::Vec6& yy) {
    last_t = t;
    last_recorded = false;
    if (++since >= stride) {
      since = 0;
      tr.t.push_back(t);
      tr.states.push_back(m.unscale(yy));
      last_recorded = true;
    }
    if (!opt.stop_when_converged) return false;
    return m.residual(yy) < opt.convergence_tol;
  });
  if (!last_recorded) {
    tr.t.push_back(last_t);
    tr.states.push_back(m.unscale(y));
  }
  tr.final_residual = m.residual(y);
  tr.converged = tr.final_residual < opt.convergence_tol;
  tr.stiffness_detected = st.stiffness_detected;
  tr.accepted_steps = st.accepted;
  tr.rejected_steps = st.rejected;
  return tr;
}

struct StabilityReport {
  std::vector<complex> eigenvalues; ///< 1/s, reduced (S_z, S-, a) system
  bool stable = false;
  std::optional<std::size_t> gauge_mode; ///< index of the global-phase zero mode
  double max_real_part = 0.0;            ///< largest real part, gauge mode excluded
};

/// Linear stability of a fixed point. Uses the five real coordinates
/// (S_z, S-, a); the total population is conserved and carries no dynamics.
/// Undriven masing points have one neutral phase mode, which is identified
/// and excluded from the verdict.
inline StabilityReport jacobian_stability(const DerivedRates& r, const ModelState& fp,
                                          std::optional<DriveSpec> drive = std::nullopt,
                                          std::optional<double> frame = std::nullopt) {
  validate(r);
  const detail::ScaledModel m(r, drive, detail::frame_frequency(r, drive, frame));
  const detail::Vec6 y = m.scale(fp);
  const double res = m.residual(y);
  if (!(res <= 1e-6)) throw not_a_fixed_point("state is not a fixed point (residual " +
                                               std::to_string(res) + ")");

  const double z = y[0] - y[1], sr = y[2], si = y[3], ar = y[4], ai = y[5];
  const double G = m.G;
  Eigen::Matrix<double, 5, 5> J;
  // clang-format off
  J << -(m.w + m.gamma), 4*G*ai,   -4*G*ar,     -4*G*si,     4*G*sr,
       -G*ai,           -0.5*m.ks, -m.det_s,     0.0,        -G*z,
        G*ar,            m.det_s,  -0.5*m.ks,    G*z,         0.0,
        0.0,             0.0,       G,          -0.5*m.kc,   -m.det_c,
        0.0,            -G,         0.0,         m.det_c,    -0.5*m.kc;
  // clang-format on

  Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(J);
  if (es.info() != Eigen::Success) throw numerical_failure("eigen-decomposition failed");

  StabilityReport rep;
  for (int i = 0; i < 5; ++i) rep.eigenvalues.push_back(es.eigenvalues()[i]);

  const bool has_fields = std::hypot(sr, si) + std::hypot(ar, ai) > 0.0;
  if (!drive && has_fields) {
    Eigen::Matrix<double, 5, 1> gauge;
    gauge << 0.0, -si, sr, -ai, ar;
    gauge.normalize();
    std::size_t best = 0;
    for (std::size_t i = 1; i < 5; ++i)
      if (std::abs(rep.eigenvalues[i]) < std::abs(rep.eigenvalues[best])) best = i;
    const auto& lam = rep.eigenvalues[best];
    if (std::abs(lam.real()) < 1e-6 * r.kappa_c && std::abs(lam.imag()) < 1e-6 * r.kappa_c) {
      const Eigen::Matrix<double, 5, 1> v = es.eigenvectors().col(static_cast<int>(best)).real();
      if (v.norm() > 0.0 && std::abs(v.normalized().dot(gauge)) > 0.99) rep.gauge_mode = best;
    }
  }

  const double tol = 1e-12 * m.rate_ref();
  rep.max_real_part = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < 5; ++i) {
    if (rep.gauge_mode && *rep.gauge_mode == i) continue;
    rep.max_real_part = std::max(rep.max_real_part, rep.eigenvalues[i].real());
  }
  rep.stable = rep.max_real_part < -tol;
  return rep;
}

} // namespace maserlab
