#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "maserlab/sweep.hpp"

namespace maserlab::io {

/// Everything a CLI run needs: device, drive, grid and integration settings.
struct RunConfig {
  GridSpec grid;          ///< grid.base holds the device parameters
  std::uint64_t seed = 1; ///< dynamics seed phase
  std::optional<double> t_end_s;

  SystemParams& params() { return grid.base; }
  const SystemParams& params() const { return grid.base; }
};

using Value = std::variant<double, bool, std::string, std::vector<std::string>>;

namespace detail {

inline double as_number(const std::string& key, const Value& v) {
  if (const double* d = std::get_if<double>(&v)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v)) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), out);
    if (ec == std::errc() && p == s->data() + s->size()) return out;
  }
  throw config_error("key '" + key + "' expects a number");
}

inline std::string as_string(const std::string& key, const Value& v) {
  if (const std::string* s = std::get_if<std::string>(&v)) return *s;
  throw config_error("key '" + key + "' expects a string");
}

inline bool as_bool(const std::string& key, const Value& v) {
  if (const bool* b = std::get_if<bool>(&v)) return *b;
  if (const std::string* s = std::get_if<std::string>(&v)) {
    if (*s == "true" || *s == "1") return true;
    if (*s == "false" || *s == "0") return false;
  }
  throw config_error("key '" + key + "' expects a boolean");
}

inline std::vector<std::string> as_list(const std::string& key, const Value& v) {
  if (const auto* l = std::get_if<std::vector<std::string>>(&v)) return *l;
  if (const std::string* s = std::get_if<std::string>(&v)) {
    std::vector<std::string> out;
    std::stringstream ss(*s);
    for (std::string item; std::getline(ss, item, ',');)
      if (!item.empty()) out.push_back(item);
    return out;
  }
  throw config_error("key '" + key + "' expects a list of strings");
}

inline std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s, const std::string& where) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw config_error(where + ": malformed string " + s);
  return s.substr(1, s.size() - 2);
}

/// Drops a trailing `# comment` that is not inside a string.
inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

} // namespace detail

/// Flat TOML subset: `key = value` with numbers, "strings", true/false and
/// arrays of strings. Tables are rejected.
inline std::map<std::string, Value> parse_flat_toml(std::istream& in) {
  std::map<std::string, Value> out;
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    const std::string where = "line " + std::to_string(no);
    line = detail::trim(detail::strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') throw config_error(where + ": tables are not supported");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty() || val.empty()) throw config_error(where + ": empty key or value");
    if (out.count(key)) throw config_error(where + ": duplicate key '" + key + "'");

    if (val.front() == '"') {
      out[key] = detail::unquote(val, where);
    } else if (val.front() == '[') {
      if (val.back() != ']') throw config_error(where + ": unterminated array");
      std::vector<std::string> items;
      std::stringstream ss(val.substr(1, val.size() - 2));
      for (std::string item; std::getline(ss, item, ',');) {
        item = detail::trim(item);
        if (!item.empty()) items.push_back(detail::unquote(item, where));
      }
      out[key] = items;
    } else if (val == "true" || val == "false") {
      out[key] = val == "true";
    } else {
      std::string num;
      for (char c : val)
        if (c != '_') num += c;
      double d = 0.0;
      const auto [p, ec] = std::from_chars(num.data(), num.data() + num.size(), d);
      if (ec != std::errc() || p != num.data() + num.size())
        throw config_error(where + ": cannot parse value '" + val + "'");
      out[key] = d;
    }
  }
  return out;
}

inline std::map<std::string, Value> parse_flat_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw config_error(std::string("JSON parse error: ") + e.what());
  }
  if (!j.is_object()) throw config_error("JSON config must be an object");
  std::map<std::string, Value> out;
  for (const auto& [k, v] : j.items()) {
    if (v.is_number()) out[k] = v.get<double>();
    else if (v.is_boolean()) out[k] = v.get<bool>();
    else if (v.is_string()) out[k] = v.get<std::string>();
    else if (v.is_array()) {
      std::vector<std::string> items;
      for (const auto& e : v) {
        if (!e.is_string()) throw config_error("key '" + k + "': arrays must hold strings");
        items.push_back(e.get<std::string>());
      }
      out[k] = items;
    } else {
      throw config_error("key '" + k + "': nested values are not supported");
    }
  }
  return out;
}

/// Applies one key. Unknown keys throw config_error.
inline void apply_key(RunConfig& c, const std::string& key, const Value& v) {
  using detail::as_bool;
  using detail::as_list;
  using detail::as_number;
  using detail::as_string;
  SystemParams& p = c.params();
  auto num = [&] { return as_number(key, v); };
  auto axis = [&](AxisSpec& a, const std::string& field) {
    if (field == "axis") a.var = parse_axis_var(as_string(key, v));
    else if (field == "min") a.min = num();
    else if (field == "max") a.max = num();
    else if (field == "points") {
      const double n = num();
      if (n < 1 || n != std::floor(n)) throw config_error(key + " must be a positive integer");
      a.points = static_cast<int>(n);
    } else if (field == "scale") {
      const std::string s = as_string(key, v);
      if (s == "log") a.log = true;
      else if (s == "linear") a.log = false;
      else throw config_error(key + " must be 'log' or 'linear'");
    } else {
      throw config_error("unknown config key '" + key + "'");
    }
  };

  try {
    if (key == "nu_c_hz") p.nu_c = num();
    else if (key == "q_factor") p.Q = num();
    else if (key == "w_per_s") p.w = num();
    else if (key == "temperature_k") p.T = num();
    else if (key == "t2_star_s") p.T2_star = num();
    else if (key == "gamma_eg_per_s") p.gamma_eg = num();
    else if (key == "q_pump") p.q = num();
    else if (key == "gamma_nv_hz_per_gauss") p.gamma_nv_per_2pi = num();
    else if (key == "d_zfs_hz") p.D_zfs = num();
    else if (key == "b_gauss") p.B = num();
    else if (key == "cavity_length_m") p.L = num();
    else if (key == "v_eff_m3") p.V_eff = num();
    else if (key == "rho_nv_per_m3") p.rho_nv = num();
    else if (key == "v_nv_m3") p.V_nv = num();
    else if (key == "orientation_divisor") p.orientation_divisor = num();
    else if (key == "kappa_ex_fraction") p.kappa_ex_fraction = num();
    else if (key == "g_hz") p.g_hz = num();
    else if (key == "n_spins") p.n_spins = num();
    else if (key == "p_in_w") c.grid.p_in_w = num();
    else if (key == "drive_detuning_hz") c.grid.drive_detuning_hz = num();
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(num());
    else if (key == "t_end_s") c.t_end_s = num();
    else if (key == "optimal_curve") c.grid.optimal_curve = as_bool(key, v);
    else if (key == "quantities") {
      c.grid.quantities.clear();
      for (const auto& s : as_list(key, v)) c.grid.quantities.push_back(parse_quantity(s));
    } else if (key.rfind("x_", 0) == 0) axis(c.grid.x, key.substr(2));
    else if (key.rfind("y_", 0) == 0) axis(c.grid.y, key.substr(2));
    else throw config_error("unknown config key '" + key + "'");
  } catch (const invalid_parameter& e) {
    throw config_error(e.what());
  }
}

inline void apply_values(RunConfig& c, const std::map<std::string, Value>& kv) {
  for (const auto& [k, v] : kv) apply_key(c, k, v);
}

/// `key=value` override from the command line; the value is kept as text and
/// converted by apply_key.
inline void apply_override(RunConfig& c, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) throw config_error("--set expects key=value, got '" + kv + "'");
  apply_key(c, detail::trim(kv.substr(0, eq)), Value{detail::trim(kv.substr(eq + 1))});
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  RunConfig c;
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  if (json) {
    std::stringstream ss;
    ss << in.rdbuf();
    apply_values(c, parse_flat_json(ss.str()));
  } else {
    apply_values(c, parse_flat_toml(in));
  }
  return c;
}

} // namespace maserlab::io
