#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rydosc/model.hpp"

namespace rydosc {

// Hardware bounds of a prototypical neutral-atom machine.
struct HardwareConstraints {
  double t_max_us = 4.0;
  double a_min_um = 4.0;
  double fov_x_um = 75.0;
  double fov_y_um = 76.0;
  double omega_min = 0.0;      // rad/us
  double omega_max = 15.8;     // rad/us
  double delta_glob_min = -125.0;
  double delta_glob_max = 125.0;
};

struct RescaledProtocol {
  double omega_new = 0.0;        // rad/us
  double a_new_um = 0.0;         // a' = (w'/w)^(1/6) a
  double rb_new_um = 0.0;        // R_b' = R_b / (w'/w)^(1/6)
  double rb_over_a_target = 0.0; // the design ratio the protocol is built for
  double delta_glob_new = 0.0;   // detunings scale with omega
  double t_prep_us = 0.0;
  double t_evolve_us = 0.0;
  double effective_duration = 0.0;  // w' t_evolve / 2pi
  double footprint_um = 0.0;        // square-like path, side ~ 4 a'
};

// Rabi rescaling arithmetic: a larger drive shortens the dynamical timescale,
// so the same physical window t_evolve = t_max - t_prep covers more cycles.
inline RescaledProtocol rescale(const ChainSpec& spec, const DriveParams& params,
                                double omega_new, double t_prep_us,
                                double t_max_us) {
  if (!(omega_new > 0.0)) throw ConfigError("rescale: omega' must be positive");
  if (!(t_prep_us < t_max_us))
    throw ConfigError("rescale: preparation must finish before the time limit");
  const double f = std::pow(omega_new / params.omega, 1.0 / 6.0);
  RescaledProtocol p;
  p.omega_new = omega_new;
  p.a_new_um = f * spec.spacing_um;
  p.rb_new_um = params.blockade_radius_um() / f;
  p.rb_over_a_target = params.blockade_radius_um() / spec.spacing_um;
  p.delta_glob_new = params.delta_glob * (omega_new / params.omega);
  p.t_prep_us = t_prep_us;
  p.t_evolve_us = t_max_us - t_prep_us;
  p.effective_duration = omega_new * p.t_evolve_us / two_pi;
  p.footprint_um = 4.0 * p.a_new_um;
  return p;
}

struct Capacity {
  int n_x = 0;
  int n_y = 0;
  int n_chain = 0;  // rectangular perimeter, 2 n_x + 2 n_y
};

inline Capacity capacity(const HardwareConstraints& hw, double a_um) {
  if (!(a_um > 0.0)) throw ConfigError("capacity: spacing must be positive");
  Capacity c;
  c.n_x = static_cast<int>(std::floor(hw.fov_x_um / a_um));
  c.n_y = static_cast<int>(std::floor(hw.fov_y_um / a_um));
  c.n_chain = 2 * c.n_x + 2 * c.n_y;
  return c;
}

struct Violation {
  std::string quantity;
  double value = 0.0;
  double bound = 0.0;
  double margin = 0.0;  // positive = amount beyond the bound
};

// Checks a rescaled protocol against the hardware bounds; an empty list
// means compliant.
inline std::vector<Violation> validate(const RescaledProtocol& p,
                                       const HardwareConstraints& hw) {
  std::vector<Violation> v;
  auto check_max = [&](const std::string& q, double value, double bound) {
    if (value > bound) v.push_back({q, value, bound, value - bound});
  };
  auto check_min = [&](const std::string& q, double value, double bound) {
    if (value < bound) v.push_back({q, value, bound, bound - value});
  };
  check_max("omega", p.omega_new, hw.omega_max);
  check_min("omega", p.omega_new, hw.omega_min);
  check_max("delta_glob", p.delta_glob_new, hw.delta_glob_max);
  check_min("delta_glob", p.delta_glob_new, hw.delta_glob_min);
  check_min("atom_spacing", p.a_new_um, hw.a_min_um);
  check_max("footprint_x", p.footprint_um, hw.fov_x_um);
  check_max("footprint_y", p.footprint_um, hw.fov_y_um);
  check_max("schedule", p.t_prep_us + p.t_evolve_us, hw.t_max_us);
  return v;
}

}  // namespace rydosc
