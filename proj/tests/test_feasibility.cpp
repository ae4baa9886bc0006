#include <catch2/catch_amalgamated.hpp>

#include "rydosc/feasibility.hpp"
#include "rydosc/model.hpp"

using namespace rydosc;
using Catch::Approx;

namespace {
auto production() { return params_from_dimensionless(16, 1.8, 4.0, 0.01, two_pi); }
}  // namespace

TEST_CASE("Rabi rescaling reproduces the quoted arithmetic") {
  const auto [spec, params] = production();
  const HardwareConstraints hw;

  const RescaledProtocol p20 =
      rescale(spec, params, omega_from_mhz(20.0), 2.0, hw.t_max_us);
  REQUIRE(p20.a_new_um == Approx(8.93).margin(0.005));
  REQUIRE(p20.effective_duration == Approx(40.0).epsilon(1e-12));
  REQUIRE(p20.t_evolve_us == Approx(2.0));
  REQUIRE(p20.footprint_um == Approx(4.0 * p20.a_new_um));
  REQUIRE(p20.footprint_um < hw.fov_x_um);
  REQUIRE(p20.footprint_um < hw.fov_y_um);

  const RescaledProtocol p2 =
      rescale(spec, params, omega_from_mhz(2.0), 2.0, hw.t_max_us);
  REQUIRE(p2.effective_duration == Approx(4.0).epsilon(1e-12));

  // identity rescaling
  const RescaledProtocol id = rescale(spec, params, params.omega, 2.0, hw.t_max_us);
  REQUIRE(id.a_new_um == Approx(spec.spacing_um).epsilon(1e-14));
  REQUIRE(id.rb_new_um == Approx(params.blockade_radius_um()).epsilon(1e-14));
  // the design ratio is echoed untouched
  REQUIRE(p20.rb_over_a_target == Approx(1.8).epsilon(1e-12));

  REQUIRE_THROWS_AS(rescale(spec, params, omega_from_mhz(2.0), 4.0, 4.0), ConfigError);
  REQUIRE_THROWS_AS(rescale(spec, params, -1.0, 2.0, 4.0), ConfigError);
}

TEST_CASE("effective duration is linear in the new Rabi frequency") {
  const auto [spec, params] = production();
  const double base =
      rescale(spec, params, omega_from_mhz(1.0), 2.0, 4.0).effective_duration;
  for (double f : {2.0, 5.0, 17.0})
    REQUIRE(rescale(spec, params, omega_from_mhz(f), 2.0, 4.0).effective_duration ==
            Approx(f * base).epsilon(1e-12));
}

TEST_CASE("capacity floor arithmetic and monotonicity") {
  const HardwareConstraints hw;
  const Capacity c = capacity(hw, 5.42);
  REQUIRE(c.n_x == 13);
  REQUIRE(c.n_y == 14);
  REQUIRE(c.n_chain == 54);

  const Capacity c893 = capacity(hw, 8.93);
  REQUIRE(c893.n_x == 8);
  REQUIRE(c893.n_y == 8);
  REQUIRE(c893.n_chain == 32);

  const Capacity big = capacity(hw, 80.0);  // spacing beyond the field of view
  REQUIRE(big.n_x == 0);
  REQUIRE(big.n_y == 0);
  REQUIRE(big.n_chain == 0);

  int prev = 1 << 30;
  for (double a = 2.0; a < 40.0; a += 0.37) {
    const int n = capacity(hw, a).n_chain;
    REQUIRE(n <= prev);
    prev = n;
  }
}

TEST_CASE("validation flags out-of-range drives and accepts the base point") {
  const auto [spec, params] = production();
  const HardwareConstraints hw;

  // Omega/2pi = 1 MHz = 6.28 rad/us is inside [0, 15.8]
  const RescaledProtocol base = rescale(spec, params, params.omega, 2.0, 4.0);
  for (const auto& v : validate(base, hw)) REQUIRE(v.quantity != "omega");

  // Omega'/2pi = 20 MHz = 125.7 rad/us exceeds the quoted range
  const RescaledProtocol p20 = rescale(spec, params, omega_from_mhz(20.0), 2.0, 4.0);
  bool omega_flagged = false;
  for (const auto& v : validate(p20, hw))
    if (v.quantity == "omega" && v.value > v.bound) omega_flagged = true;
  REQUIRE(omega_flagged);
  // but the footprint stays within the field of view
  for (const auto& v : validate(p20, hw)) {
    REQUIRE(v.quantity != "footprint_x");
    REQUIRE(v.quantity != "footprint_y");
  }
}
