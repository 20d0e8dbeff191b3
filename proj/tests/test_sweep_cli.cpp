#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "maserlab/amplifier.hpp"
#include "maserlab/io/config.hpp"
#include "maserlab/io/output.hpp"
#include "maserlab/sweep.hpp"
#include "oracles.hpp"

using namespace maserlab;

#ifndef MASERLAB_CONFIG_DIR
#define MASERLAB_CONFIG_DIR "configs"
#endif

namespace {

const std::string cfg_dir = MASERLAB_CONFIG_DIR;

GridSpec small_grid(int nx = 9, int ny = 7) {
  GridSpec g;
  g.base = reference_params();
  g.x.points = nx;
  g.y.points = ny;
  g.quantities = {Quantity::S_z, Quantity::T_coh, Quantity::delta_B, Quantity::regime};
  return g;
}

std::string csv(const SweepGrid& g) {
  std::ostringstream os;
  io::write_csv(os, g);
  return os.str();
}

} // namespace

TEST(Axis, LogAndLinearValues) {
  const AxisSpec a{AxisVar::w, 10, 1e6, 101, true};
  const auto v = a.values();
  ASSERT_EQ(v.size(), 101u);
  EXPECT_DOUBLE_EQ(v.front(), 10);
  EXPECT_DOUBLE_EQ(v.back(), 1e6);
  EXPECT_NEAR(v[80], 1e5, 1e-6);
  const AxisSpec b{AxisVar::Q, 1, 3, 3, false};
  EXPECT_EQ(b.values(), (std::vector<double>{1, 2, 3}));
  EXPECT_EQ((AxisSpec{AxisVar::Q, 5, 5, 1, true}.values()), std::vector<double>{5});
}

TEST(Sweep, SingleCellEqualsDirectCalls) {
  GridSpec g;
  g.base = reference_params();
  g.x = {AxisVar::w, 1e5, 1e5, 1, true};
  g.y = {AxisVar::Q, 1e5, 1e5, 1, true};
  g.quantities = {Quantity::S_z, Quantity::P_out, Quantity::spin_corr, Quantity::T_coh,
                  Quantity::delta_B, Quantity::delta_x, Quantity::regime};
  const SweepGrid s = run_sweep(g);
  const DerivedRates r = derive_rates(reference_params());
  const CorrelationState cs = closure_steady_state(r);
  const PhaseNoiseResult pn = schawlow_townes(r, cs);
  const SensitivityResult sr = sensitivities(r, pn);
  EXPECT_EQ(s.at(Quantity::S_z, 0, 0), cs.S_z);
  EXPECT_EQ(s.at(Quantity::P_out, 0, 0), cs.P_out);
  EXPECT_EQ(s.at(Quantity::spin_corr, 0, 0), cs.spin_corr);
  EXPECT_EQ(s.at(Quantity::T_coh, 0, 0), pn.T_coh);
  EXPECT_EQ(s.at(Quantity::delta_B, 0, 0), sr.delta_b_sqrt_tm);
  EXPECT_EQ(s.at(Quantity::delta_x, 0, 0), sr.delta_x_sqrt_tm);
  EXPECT_EQ(s.at(Quantity::regime, 0, 0), static_cast<double>(AmpRegime::masing));
}

TEST(Sweep, DrivenSingleCellEqualsAmplifier) {
  GridSpec g;
  g.base = reference_params();
  g.p_in_w = 1e-15;
  g.x = {AxisVar::w, 1e5, 1e5, 1, true};
  g.y = {AxisVar::Q, 4e4, 4e4, 1, true};
  g.quantities = {Quantity::S_z, Quantity::gain_db, Quantity::T_n, Quantity::P_out};
  const SweepGrid s = run_sweep(g);
  const DerivedRates r = derive_rates(reference_params(4e4));
  const auto b = drive_steady_state(r, {1e-15, r.omega_c}).stable_branch();
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(s.at(Quantity::S_z, 0, 0), b->S_z);
  EXPECT_EQ(s.at(Quantity::gain_db, 0, 0), b->gain_db);
  EXPECT_EQ(s.at(Quantity::T_n, 0, 0), b->T_n);
  EXPECT_EQ(s.at(Quantity::P_out, 0, 0), b->P_out);
}

TEST(Sweep, CsvIsDeterministicAcrossThreadCounts) {
  const GridSpec g = small_grid();
  const std::string a = csv(run_sweep(g));
  const std::string b = csv(run_sweep(g));
  EXPECT_EQ(a, b);
  ::setenv("MASERLAB_THREADS", "1", 1);
  const std::string serial = csv(run_sweep(g));
  ::unsetenv("MASERLAB_THREADS");
  EXPECT_EQ(a, serial);
  EXPECT_EQ(a.find("timestamp"), std::string::npos);
}

TEST(Sweep, CellsAreIndependentOfEvaluationOrder) {
  const GridSpec g = small_grid(5, 4);
  const SweepGrid s = run_sweep(g);
  // Visit the cells in reverse and compare each one bit for bit.
  for (std::size_t iy = s.y.size(); iy-- > 0;)
    for (std::size_t ix = s.x.size(); ix-- > 0;) {
      SystemParams p = g.base;
      p.w = s.x[ix];
      p.Q = s.y[iy];
      const auto v = evaluate_point(p, 0.0, 0.0, g.quantities);
      for (std::size_t k = 0; k < g.quantities.size(); ++k) {
        const double m = s.at(g.quantities[k], iy, ix);
        if (std::isnan(v[k])) {
          EXPECT_TRUE(std::isnan(m));
        } else {
          EXPECT_EQ(m, v[k]);
        }
      }
    }
}

TEST(Sweep, ThresholdOverlayMatchesClassifier) {
  GridSpec g = small_grid(41, 41);
  g.quantities = {Quantity::regime};
  const SweepGrid s = run_sweep(g);
  ASSERT_FALSE(s.threshold.points.empty());
  for (std::size_t ix = 0; ix < s.x.size(); ++ix) {
    const double Qth = threshold_quality_factor(g.base, s.x[ix]);
    for (std::size_t iy = 0; iy < s.y.size(); ++iy) {
      const bool masing = s.at(Quantity::regime, iy, ix) == static_cast<double>(AmpRegime::masing);
      if (!std::isfinite(Qth)) {
        EXPECT_FALSE(masing);
        continue;
      }
      // Cells more than one row away from the line agree with it.
      const double step = std::log(s.y[1] / s.y[0]);
      const double dist = std::log(s.y[iy] / Qth) / step;
      if (dist > 1) {
        EXPECT_TRUE(masing || is_over_pumped(derive_rates(reference_params(s.y[iy], s.x[ix]))));
      }
      if (dist < -1) {
        EXPECT_FALSE(masing);
      }
    }
  }
  for (const auto& [w, Q] : s.threshold.points)
    EXPECT_LE(oracle::rel(masing_threshold_kappa(derive_rates(reference_params(Q, w))),
                          derive_rates(reference_params(Q, w)).kappa_c), 1e-9);
}

TEST(Sweep, RegimeIsDefinedEverywhere) {
  GridSpec g = small_grid(21, 21);
  g.quantities = {Quantity::regime, Quantity::T_coh};
  const SweepGrid s = run_sweep(g);
  const auto& reg = s.matrix(Quantity::regime);
  for (double v : reg) EXPECT_FALSE(std::isnan(v));
  // T_coh is defined exactly on masing cells.
  const auto& t = s.matrix(Quantity::T_coh);
  for (std::size_t i = 0; i < t.size(); ++i)
    EXPECT_EQ(std::isfinite(t[i]), reg[i] == static_cast<double>(AmpRegime::masing)) << i;
}

TEST(Sweep, OptimalCoherenceCurve) {
  GridSpec g = small_grid(5, 9);
  g.optimal_curve = true;
  const SweepGrid s = run_sweep(g);
  ASSERT_FALSE(s.optimal_t_coh.points.empty());
  for (const auto& [w, Q] : s.optimal_t_coh.points) {
    const CoherenceOptimum o = optimal_coherence(derive_rates(reference_params(Q)));
    EXPECT_EQ(w, o.w_opt_numeric);
  }
}

TEST(Sweep, MissingCellsAreEmptyAndNull) {
  GridSpec g = small_grid(3, 3);
  g.y = {AxisVar::Q, 1e3, 1e3, 1, true};
  g.quantities = {Quantity::T_coh};
  const SweepGrid s = run_sweep(g);
  for (double v : s.matrix(Quantity::T_coh)) EXPECT_TRUE(std::isnan(v));
  std::istringstream is(csv(s));
  std::string line, last;
  while (std::getline(is, line)) last = line;
  EXPECT_EQ(last.back(), ',');
  const auto j = io::to_json(s, false);
  EXPECT_TRUE(j["quantities"]["T_coh"][0][0].is_null());
  EXPECT_FALSE(j["metadata"].contains("timestamp"));
  EXPECT_TRUE(io::to_json(s)["metadata"].contains("timestamp"));
}

TEST(Sweep, SvgRenders) {
  GridSpec g = small_grid(6, 6);
  g.optimal_curve = true;
  const SweepGrid s = run_sweep(g);
  std::ostringstream os;
  io::write_svg(os, s, Quantity::T_coh);
  const std::string svg = os.str();
  EXPECT_EQ(svg.rfind("<svg", 0) == 0 || svg.find("<svg") != std::string::npos, true);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_NE(svg.find("polyline"), std::string::npos);
}

TEST(Sweep, InvalidSpecThrows) {
  GridSpec g = small_grid();
  g.y.var = AxisVar::w;
  EXPECT_THROW(run_sweep(g), invalid_parameter);
  g = small_grid();
  g.x.min = -1;
  EXPECT_THROW(run_sweep(g), invalid_parameter);
  g = small_grid();
  g.quantities.clear();
  EXPECT_THROW(run_sweep(g), invalid_parameter);
}

TEST(CoherenceMap, MarkedCellValues) {
  io::RunConfig c = io::load_config(cfg_dir + "/coherence_map.toml");
  c.grid.optimal_curve = false;
  c.grid.x.min = c.grid.x.max = 1e5;
  c.grid.y.min = c.grid.y.max = 1e5;
  c.grid.x.points = c.grid.y.points = 1;
  const SweepGrid s = run_sweep(c.grid);
  EXPECT_NEAR(s.at(Quantity::S_z, 0, 0), 1.671e13, 0.001e13);
  EXPECT_NEAR(s.at(Quantity::P_out, 0, 0), 2.06e-6, 0.01e-6);
  EXPECT_NEAR(s.at(Quantity::T_coh, 0, 0), 5.97e4, 0.01e4);
  EXPECT_NEAR(s.at(Quantity::delta_B, 0, 0), 1.01e-12, 0.01e-12);
  EXPECT_NEAR(s.at(Quantity::delta_x, 0, 0), 15.9e-15, 0.1e-15);
  EXPECT_NEAR(s.at(Quantity::spin_corr, 0, 0), closure_steady_state(derive_rates(c.params())).spin_corr, 1.0);
}

TEST(CoherenceMap, FullGridHitsMarkedPoint) {
  // The 101-point axes put (w, Q) = (1e5, 1e5) on a grid node.
  const io::RunConfig c = io::load_config(cfg_dir + "/coherence_map.toml");
  const auto x = c.grid.x.values(), y = c.grid.y.values();
  EXPECT_NEAR(x[80], 1e5, 1e-6);
  EXPECT_NEAR(y[50], 1e5, 1e-6);
  EXPECT_NEAR(y[40], 3.98e4, 0.01e4);
}

TEST(GainMap, MarkedCellValues) {
  io::RunConfig c = io::load_config(cfg_dir + "/gain_map.toml");
  c.grid.x.min = c.grid.x.max = 1e5;
  c.grid.y.min = c.grid.y.max = 4e4;
  c.grid.x.points = c.grid.y.points = 1;
  const SweepGrid s = run_sweep(c.grid);
  EXPECT_NEAR(s.at(Quantity::gain_db, 0, 0), 25.0, 0.05);
  EXPECT_NEAR(s.at(Quantity::T_n, 0, 0), 0.152, 0.0005);
  EXPECT_NEAR(s.at(Quantity::P_out, 0, 0), 319.2e-15, 0.5e-15);
  EXPECT_FALSE(std::isnan(s.at(Quantity::regime, 0, 0)));
}

TEST(Config, TomlAndJsonAgree) {
  const io::RunConfig t = io::load_config(cfg_dir + "/coherence_map.toml");
  const io::RunConfig j = io::load_config(cfg_dir + "/coherence_map.json");
  const DerivedRates rt = derive_rates(t.params()), rj = derive_rates(j.params());
  EXPECT_EQ(rt.kappa_c, rj.kappa_c);
  EXPECT_EQ(rt.g, rj.g);
  EXPECT_EQ(rt.N, rj.N);
  EXPECT_EQ(rt.kappa_s, rj.kappa_s);
}

TEST(Config, FlatTomlParser) {
  std::istringstream in("# comment\nq_factor = 2e5  # trailing\nname = \"a # b\"\nflag = true\n"
                        "list = [\"S_z\", \"T_coh\"]\n\n");
  const auto kv = io::parse_flat_toml(in);
  EXPECT_EQ(std::get<double>(kv.at("q_factor")), 2e5);
  EXPECT_EQ(std::get<std::string>(kv.at("name")), "a # b");
  EXPECT_EQ(std::get<bool>(kv.at("flag")), true);
  EXPECT_EQ(std::get<std::vector<std::string>>(kv.at("list")).size(), 2u);
  std::istringstream bad("no equals sign\n");
  EXPECT_THROW(io::parse_flat_toml(bad), config_error);
}

TEST(Config, UnknownKeysAndBadValuesAreRejected) {
  io::RunConfig c;
  EXPECT_THROW(io::apply_override(c, "bogus_key=1"), config_error);
  EXPECT_THROW(io::apply_override(c, "q_factor"), config_error);
  EXPECT_THROW(io::apply_override(c, "q_factor=abc"), config_error);
  EXPECT_THROW(io::apply_override(c, "x_points=2.5"), config_error);
  EXPECT_THROW(io::apply_override(c, "x_scale=cubic"), config_error);
  EXPECT_THROW(io::apply_override(c, "quantities=nonsense"), config_error);
  EXPECT_THROW(io::parse_flat_json("{\"q_factor\": {\"nested\": 1}}"), config_error);
  EXPECT_THROW(io::parse_flat_json("{not json"), config_error);
  EXPECT_THROW(io::load_config("/nonexistent/path.toml"), config_error);
}

TEST(Config, OverridesApply) {
  io::RunConfig c = io::load_config(cfg_dir + "/coherence_map.toml");
  io::apply_override(c, "q_factor=4e4");
  io::apply_override(c, "x_points = 21");
  io::apply_override(c, "x_scale=linear");
  io::apply_override(c, "seed=12");
  io::apply_override(c, "quantities=t_coh");
  EXPECT_EQ(c.params().Q, 4e4);
  EXPECT_EQ(c.grid.x.points, 21);
  EXPECT_FALSE(c.grid.x.log);
  EXPECT_EQ(c.seed, 12u);
  ASSERT_EQ(c.grid.quantities.size(), 1u);
  EXPECT_EQ(c.grid.quantities[0], Quantity::T_coh);
}

TEST(Quantities, NamesRoundTrip) {
  for (Quantity q : {Quantity::S_z, Quantity::P_out, Quantity::spin_corr, Quantity::T_coh,
                     Quantity::delta_B, Quantity::delta_x, Quantity::gain_db, Quantity::T_n,
                     Quantity::regime})
    EXPECT_EQ(parse_quantity(to_string(q)), q);
  EXPECT_EQ(parse_quantity("T_COH"), Quantity::T_coh);
  EXPECT_EQ(parse_axis_var("q"), AxisVar::Q);
}
