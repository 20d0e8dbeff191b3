#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "maserlab/amplifier.hpp"
#include "maserlab/sensitivity.hpp"

namespace maserlab {

inline constexpr std::string_view version = "0.1.0";

enum class AxisVar { Q, w, P_in };
enum class Quantity { S_z, P_out, spin_corr, T_coh, delta_B, delta_x, gain_db, T_n, regime };

inline std::string_view to_string(AxisVar v) {
  switch (v) {
  case AxisVar::Q: return "Q";
  case AxisVar::w: return "w";
  case AxisVar::P_in: return "P_in";
  }
  return "?";
}

inline std::string_view to_string(Quantity q) {
  switch (q) {
  case Quantity::S_z: return "S_z";
  case Quantity::P_out: return "P_out";
  case Quantity::spin_corr: return "spin_corr";
  case Quantity::T_coh: return "T_coh";
  case Quantity::delta_B: return "delta_B";
  case Quantity::delta_x: return "delta_x";
  case Quantity::gain_db: return "gain_db";
  case Quantity::T_n: return "T_n";
  case Quantity::regime: return "regime";
  }
  return "?";
}

namespace detail {

inline bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

} // namespace detail

inline AxisVar parse_axis_var(std::string_view s) {
  for (AxisVar v : {AxisVar::Q, AxisVar::w, AxisVar::P_in})
    if (detail::iequals(s, to_string(v))) return v;
  if (detail::iequals(s, "p_in_w") || detail::iequals(s, "pin")) return AxisVar::P_in;
  throw invalid_parameter("unknown axis '" + std::string(s) + "' (expected Q, w or P_in)");
}

inline Quantity parse_quantity(std::string_view s) {
  for (Quantity q : {Quantity::S_z, Quantity::P_out, Quantity::spin_corr, Quantity::T_coh,
                     Quantity::delta_B, Quantity::delta_x, Quantity::gain_db, Quantity::T_n,
                     Quantity::regime})
    if (detail::iequals(s, to_string(q))) return q;
  throw invalid_parameter("unknown quantity '" + std::string(s) + "'");
}

struct AxisSpec {
  AxisVar var = AxisVar::w;
  double min = 1.0;
  double max = 1.0;
  int points = 1;
  bool log = true;

  std::vector<double> values() const {
    std::vector<double> v(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double f = points == 1 ? 0.0 : double(i) / (points - 1);
      v[static_cast<std::size_t>(i)] =
          log ? std::pow(10.0, std::log10(min) + f * (std::log10(max) - std::log10(min)))
              : min + f * (max - min);
    }
    if (points > 1) v.back() = max;
    v.front() = min;
    return v;
  }
};

inline void validate(const AxisSpec& a) {
  detail::require(a.points >= 1, "axis needs at least one point");
  detail::require(std::isfinite(a.min) && std::isfinite(a.max) && a.min <= a.max,
                  "axis needs finite min <= max");
  if (a.log) detail::require(a.min > 0.0, "log axis needs min > 0");
}

struct GridSpec {
  AxisSpec x{AxisVar::w, 10.0, 1e6, 101, true};
  AxisSpec y{AxisVar::Q, 1e3, 1e7, 101, true};
  SystemParams base;
  double p_in_w = 0.0;          ///< drive power when P_in is not an axis
  double drive_detuning_hz = 0.0;
  std::vector<Quantity> quantities{Quantity::S_z, Quantity::P_out, Quantity::spin_corr,
                                   Quantity::T_coh};
  bool optimal_curve = false;   ///< emit the best-coherence pump curve
};

inline void validate(const GridSpec& g) {
  validate(g.x);
  validate(g.y);
  detail::require(g.x.var != g.y.var, "x and y axes must differ");
  detail::require(!g.quantities.empty(), "no quantities requested");
  detail::require(g.p_in_w >= 0.0, "p_in_w must be >= 0");
  validate(g.base);
}

struct Polyline {
  std::vector<std::pair<double, double>> points; ///< (x, y) in axis units
};

struct SweepGrid {
  AxisSpec x_axis, y_axis;
  std::vector<double> x, y;
  /// One row-major points_y x points_x matrix per requested quantity, in
  /// request order. NaN marks undefined cells.
  std::vector<std::pair<Quantity, std::vector<double>>> data;
  Polyline threshold;
  Polyline optimal_t_coh;
  std::vector<std::pair<std::string, std::string>> metadata;

  const std::vector<double>& matrix(Quantity q) const {
    for (const auto& [k, m] : data)
      if (k == q) return m;
    throw invalid_parameter("quantity not in grid: " + std::string(to_string(q)));
  }
  double at(Quantity q, std::size_t iy, std::size_t ix) const {
    return matrix(q)[iy * x.size() + ix];
  }
};

namespace detail {

inline void apply_axis(SystemParams& p, double& p_in, AxisVar v, double value) {
  switch (v) {
  case AxisVar::Q: p.Q = value; break;
  case AxisVar::w: p.w = value; break;
  case AxisVar::P_in: p_in = value; break;
  }
}

inline bool needs(const std::vector<Quantity>& qs, std::initializer_list<Quantity> any) {
  for (Quantity q : qs)
    for (Quantity a : any)
      if (q == a) return true;
  return false;
}

} // namespace detail

/// All requested quantities at one operating point. Failures leave NaN.
inline std::vector<double> evaluate_point(const SystemParams& p, double p_in, double detuning_hz,
                                          const std::vector<Quantity>& qs) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> out(qs.size(), nan);
  auto set = [&](Quantity q, double v) {
    for (std::size_t i = 0; i < qs.size(); ++i)
      if (qs[i] == q) out[i] = v;
  };

  DerivedRates r;
  try {
    r = derive_rates(p);
  } catch (const error&) {
    return out;
  }
  const AmpRegime regime = classify_regime(r);
  set(Quantity::regime, static_cast<double>(regime));

  const bool driven = p_in > 0.0;
  const bool want_closure =
      detail::needs(qs, {Quantity::spin_corr, Quantity::T_coh, Quantity::delta_B,
                         Quantity::delta_x}) ||
      (!driven && detail::needs(qs, {Quantity::S_z, Quantity::P_out}));
  if (want_closure) {
    try {
      const CorrelationState cs = closure_steady_state(r);
      set(Quantity::spin_corr, cs.spin_corr);
      if (!driven) {
        set(Quantity::S_z, cs.S_z);
        set(Quantity::P_out, cs.P_out);
      }
      if (is_masing(r)) {
        const PhaseNoiseResult pn = schawlow_townes(r, cs);
        const SensitivityResult s = sensitivities(r, pn);
        set(Quantity::T_coh, pn.T_coh);
        set(Quantity::delta_B, s.delta_b_sqrt_tm);
        set(Quantity::delta_x, s.delta_x_sqrt_tm);
      }
    } catch (const error&) {
    }
  }

  if (detail::needs(qs, {Quantity::gain_db, Quantity::T_n}) || (driven && detail::needs(qs, {Quantity::S_z, Quantity::P_out}))) {
    try {
      if (driven) {
        const DriveSpec d{p_in, r.omega_c + constants::two_pi * detuning_hz};
        const AmplifierSolution sol = drive_steady_state(r, d);
        if (const auto b = sol.stable_branch()) {
          set(Quantity::S_z, b->S_z);
          set(Quantity::P_out, b->P_out);
          set(Quantity::gain_db, b->gain_db);
          set(Quantity::T_n, b->T_n);
        }
      } else if (regime == AmpRegime::amplifying || regime == AmpRegime::over_pumped) {
        const double G = weak_signal_gain(r);
        const double A = r.dark_inversion();
        set(Quantity::gain_db, 10.0 * std::log10(G));
        if (G >= 1.0) set(Quantity::T_n, noise_temperature(G, r, A, 0.5 * (r.N + A)));
      }
    } catch (const error&) {
    }
  }
  return out;
}

namespace detail {

inline unsigned worker_count(std::size_t cells) {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("MASERLAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(cells, 1)));
}

/// f(i) for i in [0, n) on a pool of workers; f must only write slot i.
template <class F>
void parallel_for(std::size_t n, F&& f) {
  const unsigned workers = worker_count(n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < n;) f(i);
    });
  for (auto& th : pool) th.join();
}

inline std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Pump rate -> cavity Q on the masing threshold (resonant), NaN for w <= gamma_eg.
inline double threshold_quality_factor(const SystemParams& base, double w) {
  SystemParams p = base;
  p.w = w;
  const DerivedRates r = derive_rates(p);
  const double k = masing_threshold_kappa(r);
  return k > 0.0 ? r.omega_c / k : std::numeric_limits<double>::quiet_NaN();
}

inline SweepGrid run_sweep(const GridSpec& spec) {
  validate(spec);
  SweepGrid grid;
  grid.x_axis = spec.x;
  grid.y_axis = spec.y;
  grid.x = spec.x.values();
  grid.y = spec.y.values();
  const std::size_t nx = grid.x.size(), ny = grid.y.size(), nq = spec.quantities.size();

  std::vector<std::vector<double>> cells(nx * ny);
  detail::parallel_for(nx * ny, [&](std::size_t i) {
    SystemParams p = spec.base;
    double p_in = spec.p_in_w;
    detail::apply_axis(p, p_in, spec.x.var, grid.x[i % nx]);
    detail::apply_axis(p, p_in, spec.y.var, grid.y[i / nx]);
    cells[i] = evaluate_point(p, p_in, spec.drive_detuning_hz, spec.quantities);
  });

  for (std::size_t k = 0; k < nq; ++k) {
    std::vector<double> m(nx * ny);
    for (std::size_t i = 0; i < nx * ny; ++i) m[i] = cells[i][k];
    grid.data.emplace_back(spec.quantities[k], std::move(m));
  }

  // Overlays need both Q and w on the axes.
  const bool has_qw = (spec.x.var == AxisVar::Q && spec.y.var == AxisVar::w) ||
                      (spec.x.var == AxisVar::w && spec.y.var == AxisVar::Q);
  if (has_qw) {
    const bool w_is_x = spec.x.var == AxisVar::w;
    const AxisSpec& wa = w_is_x ? spec.x : spec.y;
    AxisSpec dense = wa;
    dense.points = std::max(wa.points * 4, 2);
    for (double w : dense.values()) {
      const double Qth = threshold_quality_factor(spec.base, w);
      if (!std::isfinite(Qth)) continue;
      grid.threshold.points.push_back(w_is_x ? std::pair{w, Qth} : std::pair{Qth, w});
    }

    if (spec.optimal_curve) {
      const AxisSpec& qa = w_is_x ? spec.y : spec.x;
      std::vector<std::pair<double, double>> pts(static_cast<std::size_t>(qa.points),
                                                 {std::numeric_limits<double>::quiet_NaN(), 0.0});
      const auto qs = qa.values();
      detail::parallel_for(qs.size(), [&](std::size_t i) {
        try {
          SystemParams p = spec.base;
          p.Q = qs[i];
          const auto opt = optimal_coherence(derive_rates(p));
          pts[i] = w_is_x ? std::pair{opt.w_opt_numeric, qs[i]} : std::pair{qs[i], opt.w_opt_numeric};
        } catch (const error&) {
        }
      });
      for (const auto& pt : pts)
        if (std::isfinite(pt.first) && std::isfinite(pt.second)) grid.optimal_t_coh.points.push_back(pt);
    }
  }

  using detail::fmt17;
  auto& md = grid.metadata;
  const SystemParams& b = spec.base;
  md = {{"code_version", std::string(version)},
        {"x_axis", std::string(to_string(spec.x.var))},
        {"y_axis", std::string(to_string(spec.y.var))},
        {"nu_c_hz", fmt17(b.nu_c)},
        {"q_factor", fmt17(b.Q)},
        {"w_per_s", fmt17(b.w)},
        {"temperature_k", fmt17(b.T)},
        {"t2_star_s", fmt17(b.T2_star)},
        {"gamma_eg_per_s", fmt17(b.gamma_eg)},
        {"q_pump", fmt17(b.q)},
        {"cavity_length_m", fmt17(b.L)},
        {"kappa_ex_fraction", fmt17(b.kappa_ex_fraction)},
        {"p_in_w", fmt17(spec.p_in_w)},
        {"drive_detuning_hz", fmt17(spec.drive_detuning_hz)}};
  if (b.g_hz) md.emplace_back("g_hz", fmt17(*b.g_hz));
  else md.emplace_back("v_eff_m3", fmt17(b.V_eff));
  if (b.n_spins) md.emplace_back("n_spins", fmt17(*b.n_spins));
  else md.emplace_back("rho_nv_per_m3", fmt17(b.rho_nv));
  if (b.B) md.emplace_back("b_gauss", fmt17(*b.B));
  return grid;
}

} // namespace maserlab
