#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rydosc/basis.hpp"
#include "rydosc/eigensolve.hpp"
#include "rydosc/evolve.hpp"
#include "rydosc/feasibility.hpp"
#include "rydosc/model.hpp"

namespace rydosc {

namespace detail {

// Shortest-exact double formatting: %.15g when it round-trips, else %.17g.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  if (std::strtod(buf, nullptr) == v) return buf;
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad numeric value for '" + key + "': " + v);
  }
}

inline int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: bad integer value for '" + key + "': " + v);
  }
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

inline std::string format_list(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    out += format_double(xs[i]);
  }
  return out;
}

// Key-value text: one `key = value` per line, '#' starts a comment.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not 'key = value'");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

// Fully resolved run configuration. Dimensionless knobs mirror the usual
// presentation: alpha, beta, R_b/a, and times as Omega t / 2pi.
struct RunConfig {
  int n_s = 16;
  double rb_over_a = 1.8;
  double alpha = 4.0;
  double beta = 0.01;
  double omega_mhz = 1.0;
  double rb_um = 9.76;
  std::string layout = "ring-chord";
  std::string basis = "blockade";

  double beta_prep = -0.001;
  double dt_over_2pi = 0.005;               // Omega dt / 2pi
  std::vector<double> t_stops = {4, 40, 400};  // Omega t / 2pi
  int krylov_dim = 30;
  double krylov_tol = 1e-10;

  int pad_factor = 8;
  double peak_prominence_frac = 5e-4;  // of the global maximum
  int peak_separation_bins = 3;        // unpadded-grid bins
  double match_tol_bins = 2.0;
  double major_peak_frac = 0.05;
  double omega_max_over_omega = 8.0;

  double energy_window_over_omega = 500.0;
  double rho_meson_min = 1.5;
  double rho_meson_max = 2.5;
  double rho_z2_max = 1.0;

  std::vector<double> sweep_betas;
  double t_prep_us = 2.0;
  std::vector<double> feas_omega_mhz = {2, 20};
  int threads = 1;
  std::string out_dir = "out";

  double omega() const { return omega_from_mhz(omega_mhz); }
  // With Omega/2pi = f MHz, a dimensionless time Omega t / 2pi is t*f in us.
  double dt_us() const { return dt_over_2pi / omega_mhz; }
  double t_stop_us(double t_over_2pi) const { return t_over_2pi / omega_mhz; }
  double max_t_stop() const {
    double m = 0.0;
    for (double t : t_stops) m = std::max(m, t);
    return m;
  }

  Layout layout_enum() const { return layout_from_name(layout); }
  BasisMode basis_enum() const { return basis_mode_from_name(basis); }

  std::pair<ChainSpec, DriveParams> make_model() const {
    return params_from_dimensionless(n_s, rb_over_a, alpha, beta, omega(),
                                     layout_enum(), rb_um);
  }
  std::pair<ChainSpec, DriveParams> make_model_beta(double b) const {
    return params_from_dimensionless(n_s, rb_over_a, alpha, b, omega(),
                                     layout_enum(), rb_um);
  }

  ClassifyThresholds thresholds() const {
    return {energy_window_over_omega, rho_meson_min, rho_meson_max, rho_z2_max};
  }
  KrylovOptions krylov() const { return {krylov_dim, krylov_tol, 32}; }

  std::string to_text() const;
  static RunConfig from_text(const std::string& text);
  static RunConfig from_file(const std::string& path);
  std::string hash() const;
};

inline std::string RunConfig::to_text() const {
  using detail::format_double;
  std::string s;
  auto put = [&](const std::string& k, const std::string& v) {
    s += k + " = " + v + "\n";
  };
  put("n_s", std::to_string(n_s));
  put("rb_over_a", format_double(rb_over_a));
  put("alpha", format_double(alpha));
  put("beta", format_double(beta));
  put("omega_mhz", format_double(omega_mhz));
  put("rb_um", format_double(rb_um));
  put("layout", layout);
  put("basis", basis);
  put("beta_prep", format_double(beta_prep));
  put("dt_over_2pi", format_double(dt_over_2pi));
  put("t_stops", detail::format_list(t_stops));
  put("krylov_dim", std::to_string(krylov_dim));
  put("krylov_tol", format_double(krylov_tol));
  put("pad_factor", std::to_string(pad_factor));
  put("peak_prominence_frac", format_double(peak_prominence_frac));
  put("peak_separation_bins", std::to_string(peak_separation_bins));
  put("match_tol_bins", format_double(match_tol_bins));
  put("major_peak_frac", format_double(major_peak_frac));
  put("omega_max_over_omega", format_double(omega_max_over_omega));
  put("energy_window_over_omega", format_double(energy_window_over_omega));
  put("rho_meson_min", format_double(rho_meson_min));
  put("rho_meson_max", format_double(rho_meson_max));
  put("rho_z2_max", format_double(rho_z2_max));
  put("sweep_betas", detail::format_list(sweep_betas));
  put("t_prep_us", format_double(t_prep_us));
  put("feas_omega_mhz", detail::format_list(feas_omega_mhz));
  put("threads", std::to_string(threads));
  put("out_dir", out_dir);
  return s;
}

inline RunConfig RunConfig::from_text(const std::string& text) {
  using namespace detail;
  RunConfig c;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "n_s") c.n_s = parse_int(key, value);
    else if (key == "rb_over_a") c.rb_over_a = parse_double(key, value);
    else if (key == "alpha") c.alpha = parse_double(key, value);
    else if (key == "beta") c.beta = parse_double(key, value);
    else if (key == "omega_mhz") c.omega_mhz = parse_double(key, value);
    else if (key == "rb_um") c.rb_um = parse_double(key, value);
    else if (key == "layout") c.layout = value;
    else if (key == "basis") c.basis = value;
    else if (key == "beta_prep") c.beta_prep = parse_double(key, value);
    else if (key == "dt_over_2pi") c.dt_over_2pi = parse_double(key, value);
    else if (key == "t_stops") c.t_stops = parse_list(key, value);
    else if (key == "krylov_dim") c.krylov_dim = parse_int(key, value);
    else if (key == "krylov_tol") c.krylov_tol = parse_double(key, value);
    else if (key == "pad_factor") c.pad_factor = parse_int(key, value);
    else if (key == "peak_prominence_frac") c.peak_prominence_frac = parse_double(key, value);
    else if (key == "peak_separation_bins") c.peak_separation_bins = parse_int(key, value);
    else if (key == "match_tol_bins") c.match_tol_bins = parse_double(key, value);
    else if (key == "major_peak_frac") c.major_peak_frac = parse_double(key, value);
    else if (key == "omega_max_over_omega") c.omega_max_over_omega = parse_double(key, value);
    else if (key == "energy_window_over_omega") c.energy_window_over_omega = parse_double(key, value);
    else if (key == "rho_meson_min") c.rho_meson_min = parse_double(key, value);
    else if (key == "rho_meson_max") c.rho_meson_max = parse_double(key, value);
    else if (key == "rho_z2_max") c.rho_z2_max = parse_double(key, value);
    else if (key == "sweep_betas") c.sweep_betas = parse_list(key, value);
    else if (key == "t_prep_us") c.t_prep_us = parse_double(key, value);
    else if (key == "feas_omega_mhz") c.feas_omega_mhz = parse_list(key, value);
    else if (key == "threads") c.threads = parse_int(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  if (c.t_stops.empty()) throw ConfigError("config: t_stops must not be empty");
  for (std::size_t i = 1; i < c.t_stops.size(); ++i)
    if (c.t_stops[i] <= c.t_stops[i - 1])
      throw ConfigError("config: t_stops must be strictly increasing");
  return c;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

// Provenance hash over the result-affecting keys; where outputs land and how
// many workers ran do not change their bytes.
inline std::string RunConfig::hash() const {
  std::string filtered;
  std::stringstream ss(to_text());
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("out_dir", 0) == 0 || line.rfind("threads", 0) == 0) continue;
    filtered += line;
    filtered += "\n";
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a(filtered)));
  return buf;
}

// Hardware-constraints file, same key-value format; the built-in defaults
// match the shipped configs/hardware.constraints.
inline HardwareConstraints constraints_from_text(const std::string& text) {
  using namespace detail;
  HardwareConstraints hw;
  for (const auto& [key, value] : parse_key_values(text)) {
    if (key == "t_max_us") hw.t_max_us = parse_double(key, value);
    else if (key == "a_min_um") hw.a_min_um = parse_double(key, value);
    else if (key == "fov_x_um") hw.fov_x_um = parse_double(key, value);
    else if (key == "fov_y_um") hw.fov_y_um = parse_double(key, value);
    else if (key == "omega_min") hw.omega_min = parse_double(key, value);
    else if (key == "omega_max") hw.omega_max = parse_double(key, value);
    else if (key == "delta_glob_min") hw.delta_glob_min = parse_double(key, value);
    else if (key == "delta_glob_max") hw.delta_glob_max = parse_double(key, value);
    else throw ConfigError("constraints: unknown key '" + key + "'");
  }
  return hw;
}

inline HardwareConstraints constraints_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("constraints: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return constraints_from_text(ss.str());
}

}  // namespace rydosc
