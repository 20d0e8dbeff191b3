// maserlab command-line front end.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "maserlab/golden.hpp"
#include "maserlab/io/config.hpp"
#include "maserlab/io/output.hpp"
#include "maserlab/maserlab.hpp"

namespace {

using namespace maserlab;
using Row = std::vector<std::pair<std::string, double>>;

struct Options {
  std::string config;
  std::optional<double> w, q, p_in;
  std::vector<std::string> sets;
  std::string csv, json, svg;
  std::vector<std::string> quantities;
  std::optional<double> t_end;
  std::optional<std::uint64_t> seed;
  std::size_t stride = 1;
};

io::RunConfig make_config(const Options& o) {
  io::RunConfig c;
  if (o.config.empty()) c.grid.base = reference_params();
  else c = io::load_config(o.config);
  for (const auto& s : o.sets) io::apply_override(c, s);
  if (o.w) c.params().w = *o.w;
  if (o.q) c.params().Q = *o.q;
  if (o.p_in) c.grid.p_in_w = *o.p_in;
  if (!o.quantities.empty()) {
    c.grid.quantities.clear();
    for (const auto& s : o.quantities) {
      try {
        c.grid.quantities.push_back(parse_quantity(s));
      } catch (const invalid_parameter& e) {
        throw config_error(e.what());
      }
    }
  }
  if (o.t_end) c.t_end_s = *o.t_end;
  if (o.seed) c.seed = *o.seed;
  return c;
}

DerivedRates rates_of(const io::RunConfig& c) {
  try {
    return derive_rates(c.params());
  } catch (const invalid_parameter& e) {
    throw config_error(e.what());
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw config_error("cannot write '" + path + "'");
  return f;
}

void print_rows(const Row& row) {
  for (const auto& [k, v] : row) std::printf("  %-22s %.6g\n", k.c_str(), v);
}

/// Single-row CSV / flat JSON for point commands.
void emit_row(const Options& o, const Row& row, const nlohmann::json& extra = {}) {
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << row[i].first;
    f << '\n';
    char buf[32];
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", row[i].second);
      f << (i ? "," : "") << (std::isfinite(row[i].second) ? buf : "");
    }
    f << '\n';
  }
  if (!o.json.empty()) {
    nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
    for (const auto& [k, v] : row) j[k] = std::isfinite(v) ? nlohmann::json(v) : nlohmann::json();
    open_out(o.json) << j.dump(2) << '\n';
  }
}

int cmd_rates(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const double kth = masing_threshold_kappa(r);
  Row row{{"nu_c_hz", r.omega_c / constants::two_pi},
          {"nu_s_hz", r.omega_s / constants::two_pi},
          {"g_hz", r.g / constants::two_pi},
          {"N", r.N},
          {"kappa_c", r.kappa_c},
          {"kappa_ex", r.kappa_ex},
          {"kappa_s", r.kappa_s},
          {"n_th", r.n_th},
          {"w_max", over_pump_limit(r)},
          {"threshold_Q", kth > 0 ? r.omega_c / kth : NAN}};
  std::printf("derived rates (1/s unless noted)\n");
  print_rows(row);
  emit_row(o, row);
  return 0;
}

int cmd_steady(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const MeanFieldState st = steady_state(r);
  Row row{{"S_z", st.S_z},
          {"n_c", st.n_c},
          {"n_s", st.n_s},
          {"abs_S_minus", std::abs(st.S_minus)},
          {"omega_offset", st.omega - r.omega_c},
          {"delta_cs", st.delta_cs},
          {"residual", meanfield_residual(r, st)}};
  std::printf("mean-field steady state: %s\n", std::string(to_string(st.regime)).c_str());
  print_rows(row);
  emit_row(o, row, {{"regime", to_string(st.regime)}});
  return 0;
}

int cmd_correlations(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const CorrelationState cs = closure_steady_state(r);
  Row row{{"S_z", cs.S_z},           {"N_e", cs.N_e},
          {"spin_corr", cs.spin_corr}, {"spin_corr_total", cs.spin_corr_total},
          {"n_c", cs.n_c},           {"n_coherent", cs.n_coherent},
          {"P_out_w", cs.P_out},     {"residual", closure_residual(r, cs)}};
  std::printf("correlation steady state\n");
  print_rows(row);
  emit_row(o, row);
  return 0;
}

int cmd_linewidth(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const CorrelationState cs = closure_steady_state(r);
  const PhaseNoiseResult pn = schawlow_townes(r, cs);
  Row row{{"gamma_st", pn.gamma_st}, {"T_coh_s", pn.T_coh},   {"fwhm_hz", pn.fwhm_linewidth},
          {"n_incoh", pn.n_incoh},   {"n_c", pn.n_c},         {"n_s", pn.n_s}};
  std::printf("phase diffusion\n");
  print_rows(row);
  if (!o.csv.empty()) {
    const auto grid = default_spectrum_grid(r);
    const auto spec = phase_noise_spectrum(r, cs, grid);
    auto f = open_out(o.csv);
    f << "omega,value,spin_term,cavity_term\n";
    char buf[128];
    for (const auto& s : spec) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", s.omega, s.value, s.spin_term,
                    s.cavity_term);
      f << buf;
    }
  }
  Options no_csv = o;
  no_csv.csv.clear();
  emit_row(no_csv, row);
  return 0;
}

int cmd_sensitivity(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const SensitivityResult s = sensitivities(r);
  Row row{{"delta_B_T_per_rtHz", s.delta_b_sqrt_tm},
          {"delta_B_G_per_rtHz", s.delta_b_gauss()},
          {"delta_x_m_per_rtHz", s.delta_x_sqrt_tm},
          {"omega_max_B", s.omega_max_B},
          {"omega_max_x", s.omega_max_x}};
  std::printf("sensitivity: %.4g pT/rtHz, %.4g fm/rtHz\n", s.delta_b_sqrt_tm * 1e12,
              s.delta_x_sqrt_tm * 1e15);
  print_rows(row);
  emit_row(o, row);
  return 0;
}

int cmd_amplify(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  const DriveSpec d{c.grid.p_in_w, r.omega_c + constants::two_pi * c.grid.drive_detuning_hz};
  const AmplifierSolution sol = drive_steady_state(r, d);
  std::printf("regime: %s, P_in = %.4g W, roundtrip loss %.4g dB\n",
              std::string(to_string(sol.regime)).c_str(), d.P_in, sol.L_db);
  for (const auto& b : sol.branches)
    std::printf("  S_z %.6e  G %.6g (%.2f dB)  T_n %.4g K  P_out %.4g W  %s\n", b.S_z, b.G,
                b.gain_db, b.T_n, b.P_out, b.stable ? "stable" : "unstable");
  if (const auto b = sol.stable_branch())
    std::printf("gain %.1f dB, noise temperature %.3f K\n", b->gain_db, b->T_n);

  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    f << "S_z,G,gain_db,T_n,P_out,re_s_out,im_s_out,stable\n";
    char buf[256];
    for (const auto& b : sol.branches) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%s,%.17g,%.17g,%.17g,%d\n", b.S_z, b.G,
                    b.gain_db, std::isfinite(b.T_n) ? std::to_string(b.T_n).c_str() : "",
                    b.P_out, b.s_out.real(), b.s_out.imag(), b.stable ? 1 : 0);
      f << buf;
    }
  }
  if (!o.json.empty()) {
    nlohmann::json j;
    j["regime"] = to_string(sol.regime);
    j["L_db"] = sol.L_db;
    j["tau_rt"] = sol.tau_rt;
    j["branches"] = nlohmann::json::array();
    for (const auto& b : sol.branches)
      j["branches"].push_back({{"S_z", b.S_z},
                               {"G", b.G},
                               {"gain_db", b.gain_db},
                               {"T_n", std::isfinite(b.T_n) ? nlohmann::json(b.T_n) : nlohmann::json()},
                               {"P_out", b.P_out},
                               {"stable", b.stable}});
    open_out(o.json) << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_dynamics(const Options& o) {
  const auto c = make_config(o);
  const DerivedRates r = rates_of(c);
  IntegrateOptions opt;
  opt.t_end = c.t_end_s;
  opt.record_every = o.stride;
  std::optional<DriveSpec> drive;
  if (c.grid.p_in_w > 0.0)
    drive = DriveSpec{c.grid.p_in_w, r.omega_c + constants::two_pi * c.grid.drive_detuning_hz};
  const DynamicsTrace tr = integrate(r, seeded_dark_state(r, c.seed), drive, opt);
  const ModelState& f = tr.final_state();
  Row row{{"t_final", tr.t.back()},       {"S_z", f.S_z()},
          {"n_c", std::norm(f.a)},        {"abs_S_minus", std::abs(f.S_minus)},
          {"residual", tr.final_residual}, {"accepted_steps", double(tr.accepted_steps)}};
  std::printf("integration %s%s\n", tr.converged ? "converged" : "did not converge",
              tr.stiffness_detected ? " (stiffness detected)" : "");
  print_rows(row);
  if (!o.csv.empty()) {
    auto file = open_out(o.csv);
    tr.write_csv(file);
  }
  if (!o.json.empty()) {
    nlohmann::json j;
    for (const auto& [k, v] : row) j[k] = v;
    j["converged"] = tr.converged;
    open_out(o.json) << j.dump(2) << '\n';
  }
  return tr.converged ? 0 : 3;
}

int cmd_sweep(const Options& o) {
  const auto c = make_config(o);
  GridSpec spec = c.grid;
  if (!o.svg.empty()) spec.optimal_curve = true;
  try {
    validate(spec);
  } catch (const invalid_parameter& e) {
    throw config_error(e.what());
  }
  const auto t0 = std::chrono::steady_clock::now();
  const SweepGrid g = run_sweep(spec);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("sweep %zu x %zu (%s x %s), %zu quantities, %.2f s\n", g.x.size(), g.y.size(),
              std::string(to_string(spec.x.var)).c_str(),
              std::string(to_string(spec.y.var)).c_str(), g.data.size(), secs);
  if (!o.csv.empty()) {
    auto f = open_out(o.csv);
    io::write_csv(f, g);
  }
  if (!o.json.empty()) open_out(o.json) << io::to_json(g).dump() << '\n';
  if (!o.svg.empty()) {
    auto f = open_out(o.svg);
    io::write_svg(f, g, spec.quantities.front());
  }
  return 0;
}

int run_check() {
  bool ok = true;
  for (const auto& g : golden_checks()) {
    std::printf("%s  %-28s %.6g  [%g, %g]\n", g.pass() ? "PASS" : "FAIL", g.name.c_str(),
                g.value, g.lo, g.hi);
    ok = ok && g.pass();
  }
  return ok ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Room-temperature NV-diamond maser and amplifier model"};
  app.require_subcommand(0, 1);
  bool check = false;
  app.add_flag("--check", check, "Run the built-in golden-value suite");

  Options o;
  auto common = [&](CLI::App* s, bool files = true) {
    s->add_option("--config", o.config, "Config file (.toml or .json)");
    s->add_option("--w", o.w, "Pump rate w, 1/s");
    s->add_option("--q", o.q, "Cavity quality factor Q");
    s->add_option("--p-in", o.p_in, "Input power, W");
    s->add_option("--set", o.sets, "Override a config key: key=value")->allow_extra_args(false);
    if (files) {
      s->add_option("--csv", o.csv, "Write CSV to this path");
      s->add_option("--json", o.json, "Write JSON to this path");
    }
  };

  using Cmd = int (*)(const Options&);
  std::vector<std::pair<CLI::App*, Cmd>> cmds;
  auto add = [&](const char* name, const char* help, Cmd fn) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    cmds.emplace_back(s, fn);
    return s;
  };
  add("rates", "Derived rates of the device", cmd_rates);
  add("steady", "Mean-field steady state", cmd_steady);
  add("correlations", "Second-order correlation steady state", cmd_correlations);
  add("linewidth", "Schawlow-Townes linewidth; --csv writes the phase-noise spectrum",
      cmd_linewidth);
  add("sensitivity", "Magnetic-field and displacement sensitivity", cmd_sensitivity);
  add("amplify", "Driven steady state, gain and noise temperature", cmd_amplify);
  auto* dyn = add("dynamics", "Integrate the mean-field equations; --csv writes the trace",
                  cmd_dynamics);
  dyn->add_option("--t-end", o.t_end, "Integration time, s");
  dyn->add_option("--seed", o.seed, "Seed for the initial spin phase");
  dyn->add_option("--stride", o.stride, "Record every n-th accepted step")
      ->check(CLI::PositiveNumber);
  auto* sw = add("sweep", "Parameter grid over (Q, w, P_in)", cmd_sweep);
  sw->add_option("--quantity", o.quantities, "Quantity to compute (repeatable)");
  sw->add_option("--svg", o.svg, "Heatmap of the first quantity");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (check) return run_check();
    for (const auto& [s, fn] : cmds)
      if (s->parsed()) return fn(o);
    std::cerr << app.help();
    return 1;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const invalid_parameter& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const numerical_failure& e) {
    std::cerr << "numerical failure: " << e.what() << " (residual " << e.residual() << ")\n";
    return 3;
  } catch (const maserlab::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
