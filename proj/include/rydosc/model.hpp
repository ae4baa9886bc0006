#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "rydosc/errors.hpp"

namespace rydosc {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

// Internal units: angular frequencies in rad/us (hbar = 1), lengths in um,
// times in us. An input of f MHz of 2pi converts as omega = 2*pi*f rad/us.
inline double omega_from_mhz(double f_mhz) { return two_pi * f_mhz; }
inline double mhz_from_omega(double omega) { return omega / two_pi; }

// Distance convention for a ring of atoms. RingChord places the atoms on a
// physical circle and uses Euclidean chord distances; Modular1d uses d*a for
// ring separation d. They agree for nearest neighbors and differ by ~12% in
// the next-nearest-neighbor interaction at n_s = 16.
enum class Layout { RingChord, Modular1d };

inline std::string layout_name(Layout l) {
  return l == Layout::RingChord ? "ring-chord" : "modular-1d";
}

inline Layout layout_from_name(const std::string& name) {
  if (name == "ring-chord") return Layout::RingChord;
  if (name == "modular-1d") return Layout::Modular1d;
  throw ConfigError("unknown layout '" + name + "' (ring-chord | modular-1d)");
}

// Ring geometry: n_sites atoms with constant nearest-neighbor spacing,
// periodic boundary conditions. Sites are 1-based; site 1 is the leftmost
// bit of a basis label.
struct ChainSpec {
  int n_sites = 16;
  double spacing_um = 5.42;
  Layout layout = Layout::RingChord;
};

inline ChainSpec make_chain(int n_sites, double spacing_um,
                            Layout layout = Layout::RingChord) {
  if (n_sites < 4 || n_sites % 2 != 0)
    throw ConfigError("n_s must be even and >= 4, got " + std::to_string(n_sites));
  if (!(spacing_um > 0.0))
    throw ConfigError("atom spacing must be positive");
  return ChainSpec{n_sites, spacing_um, layout};
}

// Ring separation min(|j-k|, n_s-|j-k|); sites 1-based.
inline int ring_separation(const ChainSpec& spec, int j, int k) {
  if (j < 1 || j > spec.n_sites || k < 1 || k > spec.n_sites)
    throw ConfigError("site index out of range");
  const int d = std::abs(j - k);
  return std::min(d, spec.n_sites - d);
}

inline double distance_for_separation(const ChainSpec& spec, int d) {
  if (d == 0) return 0.0;
  if (spec.layout == Layout::Modular1d) return d * spec.spacing_um;
  // Chord between points d apart on a circle through all n_s sites with
  // nearest-neighbor chord a: 2 R sin(pi d / n_s), R = a / (2 sin(pi / n_s)).
  const double n = static_cast<double>(spec.n_sites);
  return spec.spacing_um * std::sin(std::numbers::pi * d / n) /
         std::sin(std::numbers::pi / n);
}

inline double pair_distance(const ChainSpec& spec, int j, int k) {
  return distance_for_separation(spec, ring_separation(spec, j, k));
}

// Drive parameters in angular-frequency units. delta_loc carries the sign of
// the staggered field amplitude; site j receives (-1)^j * delta_loc.
struct DriveParams {
  double omega = two_pi;        // Rabi frequency, rad/us
  double delta_glob = 0.0;      // global detuning, rad/us
  double delta_loc = 0.0;       // staggered local detuning amplitude, rad/us
  double c6 = 0.0;              // van der Waals coefficient, rad um^6 / us

  double alpha() const { return delta_glob / omega; }
  double beta() const { return delta_loc / delta_glob; }
  double blockade_radius_um() const { return std::pow(c6 / omega, 1.0 / 6.0); }
};

// V_jk = C6 / r^6.
inline double interaction(const DriveParams& params, double r_um) {
  if (!(r_um > 0.0)) throw ConfigError("invalid geometry: pair distance must be positive");
  const double r3 = r_um * r_um * r_um;
  return params.c6 / (r3 * r3);
}

inline double nn_interaction(const ChainSpec& spec, const DriveParams& params) {
  return interaction(params, distance_for_separation(spec, 1));
}

inline double nnn_interaction(const ChainSpec& spec, const DriveParams& params) {
  return interaction(params, distance_for_separation(spec, 2));
}

// Staggered field (-1)^j * delta_loc; odd sites get -delta_loc.
inline double local_detuning(const DriveParams& params, int j) {
  return (j % 2 == 0) ? params.delta_loc : -params.delta_loc;
}

inline double site_detuning(const DriveParams& params, int j) {
  return params.delta_glob + local_detuning(params, j);
}

// Builds (spec, params) from the dimensionless inputs used throughout:
// alpha = delta_glob/omega, beta = delta_loc/delta_glob, R_b/a, with the
// blockade radius fixing C6 = omega * R_b^6 and a = R_b / (R_b/a).
inline std::pair<ChainSpec, DriveParams> params_from_dimensionless(
    int n_sites, double rb_over_a, double alpha, double beta, double omega,
    Layout layout = Layout::RingChord, double rb_um = 9.76) {
  if (!(omega > 0.0)) throw ConfigError("omega must be positive");
  if (!(rb_over_a > 0.0)) throw ConfigError("R_b/a must be positive");
  if (!(rb_um > 0.0)) throw ConfigError("R_b must be positive");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  ChainSpec spec = make_chain(n_sites, rb_um / rb_over_a, layout);
  DriveParams params;
  params.omega = omega;
  params.delta_glob = alpha * omega;
  params.delta_loc = beta * params.delta_glob;
  const double rb3 = rb_um * rb_um * rb_um;
  params.c6 = omega * rb3 * rb3;
  return {spec, params};
}

}  // namespace rydosc
