#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <string>

#include <json.hpp>

#include "maserlab/sweep.hpp"

namespace maserlab::io {

/// `# key=value` metadata, header row, then x,y,quantities row by row
/// (y outer). NaN cells are empty.
inline void write_csv(std::ostream& os, const SweepGrid& g) {
  for (const auto& [k, v] : g.metadata) os << "# " << k << '=' << v << '\n';
  os << to_string(g.x_axis.var) << ',' << to_string(g.y_axis.var);
  for (const auto& [q, m] : g.data) os << ',' << to_string(q);
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    if (std::isfinite(v)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << buf;
    }
  };
  for (std::size_t iy = 0; iy < g.y.size(); ++iy)
    for (std::size_t ix = 0; ix < g.x.size(); ++ix) {
      put(g.x[ix]);
      os << ',';
      put(g.y[iy]);
      for (const auto& [q, m] : g.data) {
        os << ',';
        put(m[iy * g.x.size() + ix]);
      }
      os << '\n';
    }
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline nlohmann::json to_json(const SweepGrid& g, bool with_timestamp = true) {
  using nlohmann::json;
  json j;
  json md = json::object();
  for (const auto& [k, v] : g.metadata) md[k] = v;
  if (with_timestamp) md["timestamp"] = utc_timestamp();
  j["metadata"] = md;
  j["x"] = {{"name", to_string(g.x_axis.var)}, {"values", g.x}};
  j["y"] = {{"name", to_string(g.y_axis.var)}, {"values", g.y}};
  json qs = json::object();
  for (const auto& [q, m] : g.data) {
    json rows = json::array();
    for (std::size_t iy = 0; iy < g.y.size(); ++iy) {
      json row = json::array();
      for (std::size_t ix = 0; ix < g.x.size(); ++ix) {
        const double v = m[iy * g.x.size() + ix];
        row.push_back(std::isfinite(v) ? json(v) : json(nullptr));
      }
      rows.push_back(row);
    }
    qs[std::string(to_string(q))] = rows;
  }
  j["quantities"] = qs;
  auto poly = [](const Polyline& p) {
    json a = json::array();
    for (const auto& [x, y] : p.points) a.push_back({x, y});
    return a;
  };
  j["threshold"] = poly(g.threshold);
  j["optimal_t_coh"] = poly(g.optimal_t_coh);
  return j;
}

namespace detail {

/// Fixed five-stop ramp (dark blue, teal, green, yellow-green, yellow).
inline std::string ramp_color(double f) {
  static constexpr double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  f = std::clamp(f, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(f));
  const double t = f - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x",
                static_cast<int>(std::lround(stops[i][0] + t * (stops[i + 1][0] - stops[i][0]))),
                static_cast<int>(std::lround(stops[i][1] + t * (stops[i + 1][1] - stops[i][1]))),
                static_cast<int>(std::lround(stops[i][2] + t * (stops[i + 1][2] - stops[i][2]))));
  return buf;
}

} // namespace detail

/// Heatmap of one quantity with the threshold (white) and best-coherence
/// (blue, dashed) overlays. Colour is log-scaled when the finite values are
/// positive and span more than two decades.
inline void write_svg(std::ostream& os, const SweepGrid& g, Quantity q) {
  const auto& m = g.matrix(q);
  const std::size_t nx = g.x.size(), ny = g.y.size();
  const double W = 640, H = 480, left = 70, top = 30, pw = W - left - 100, ph = H - top - 60;

  double lo = INFINITY, hi = -INFINITY;
  bool positive = true;
  for (double v : m)
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      positive = positive && v > 0.0;
    }
  const bool logc = positive && lo > 0.0 && hi / lo > 100.0;
  auto frac = [&](double v) {
    if (!(hi > lo)) return 0.5;
    return logc ? std::log10(v / lo) / std::log10(hi / lo) : (v - lo) / (hi - lo);
  };
  auto axis_frac = [](const AxisSpec& a, double v) {
    if (a.max == a.min) return 0.5;
    return a.log ? std::log10(v / a.min) / std::log10(a.max / a.min)
                 : (v - a.min) / (a.max - a.min);
  };
  auto px = [&](double x) { return left + axis_frac(g.x_axis, x) * pw; };
  auto py = [&](double y) { return top + (1.0 - axis_frac(g.y_axis, y)) * ph; };

  char buf[256];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  const double cw = pw / nx, ch = ph / ny;
  for (std::size_t iy = 0; iy < ny; ++iy)
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double v = m[iy * nx + ix];
      const std::string fill = std::isfinite(v) ? detail::ramp_color(frac(v)) : "#c0c0c0";
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"%s\"/>\n",
                    left + ix * cw, top + (ny - 1 - iy) * ch, cw + 0.3, ch + 0.3, fill.c_str());
      os << buf;
    }

  auto polyline = [&](const Polyline& p, const char* style) {
    if (p.points.size() < 2) return;
    os << "<polyline fill=\"none\" " << style << " points=\"";
    for (const auto& [x, y] : p.points) {
      if (axis_frac(g.y_axis, y) < 0 || axis_frac(g.y_axis, y) > 1) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(x), py(y));
      os << buf;
    }
    os << "\"/>\n";
  };
  polyline(g.threshold, "stroke=\"white\" stroke-width=\"2\"");
  polyline(g.optimal_t_coh, "stroke=\"#1f4fff\" stroke-width=\"2\" stroke-dasharray=\"6,4\"");

  std::snprintf(buf, sizeof buf,
                "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" "
                "stroke=\"black\"/>\n",
                left, top, pw, ph);
  os << buf;
  const std::string xs = g.x_axis.log ? " (log)" : "", ys = g.y_axis.log ? " (log)" : "";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"14\" text-anchor=\"middle\">%s%s: "
                "%.3g .. %.3g</text>\n",
                left + pw / 2, H - 20, std::string(to_string(g.x_axis.var)).c_str(), xs.c_str(),
                g.x_axis.min, g.x_axis.max);
  os << buf;
  std::snprintf(buf, sizeof buf,
                "<text x=\"20\" y=\"%.0f\" font-size=\"14\" text-anchor=\"middle\" "
                "transform=\"rotate(-90 20 %.0f)\">%s%s: %.3g .. %.3g</text>\n",
                top + ph / 2, top + ph / 2, std::string(to_string(g.y_axis.var)).c_str(),
                ys.c_str(), g.y_axis.min, g.y_axis.max);
  os << buf;

  // Colour bar.
  const double bx = left + pw + 20;
  for (int i = 0; i < 50; ++i) {
    std::snprintf(buf, sizeof buf,
                  "<rect x=\"%.0f\" y=\"%.2f\" width=\"16\" height=\"%.2f\" fill=\"%s\"/>\n", bx,
                  top + ph - (i + 1) * ph / 50, ph / 50 + 0.3,
                  detail::ramp_color(i / 49.0).c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf,
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.3g</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"11\">%.3g</text>\n"
                "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\">%s%s</text>\n",
                bx + 20, top + 10, hi, bx + 20, top + ph, lo, bx - 10, top - 10,
                std::string(to_string(q)).c_str(), logc ? " (log)" : "");
  os << buf << "</svg>\n";
}

} // namespace maserlab::io
