#include <doctest.h>

#include <cmath>

#include "modlat/lattice.hpp"

using namespace modlat;

namespace {

// Hand-derived closed form of the Gaussian-overlap link integral, written
// independently of the library's quadrature path. With s = 1/(pi^2 sqrt(V)):
// overlap O = exp(-1/(4s)), kinetic piece K = -(1/pi^2) O ((1/4 + s/2)/s^2 - 1/s),
// potential piece P = V O (1 + exp(-pi^2 s))/2, and J = |K + P|.
double gaussian_link_oracle(double v) {
  const double s = 1.0 / (M_PI * M_PI * std::sqrt(v));
  const double o = std::exp(-1.0 / (4.0 * s));
  const double k = -(1.0 / (M_PI * M_PI)) * o * ((0.25 + 0.5 * s) / (s * s) - 1.0 / s);
  const double p = v * o * (1.0 + std::exp(-M_PI * M_PI * s)) / 2.0;
  return std::abs(k + p);
}

}  // namespace

TEST_SUITE("unit_lattice") {

TEST_CASE("tunneling quadrature matches the closed-form oracle") {
  LatticeSpec spec;
  for (double v : {5.0, 8.0, 15.0, 25.0, 50.0}) {
    CAPTURE(v);
    CHECK(tunneling(spec, v) == doctest::Approx(gaussian_link_oracle(v)).epsilon(1e-7));
  }
}

TEST_CASE("tunneling at reference depths, frozen values") {
  LatticeSpec spec;
  CHECK(tunneling(spec, 15.0) == doctest::Approx(1.54125915504e-3).epsilon(1e-9));
  CHECK(tunneling(spec, 50.0) == doctest::Approx(1.93596974319e-6).epsilon(1e-8));
  CHECK(tunneling(spec, 5.0) == doctest::Approx(2.86012398468e-2).epsilon(1e-9));
}

TEST_CASE("onsite interaction closed form") {
  LatticeSpec spec;
  const double by_hand_15 =
      std::sqrt(8.0 * M_PI) * (5.2 / 640.0) * std::sqrt(50.0) * std::pow(15.0, 0.25);
  CHECK(onsite_interaction(spec, 15.0) == doctest::Approx(by_hand_15).epsilon(1e-12));
  CHECK(onsite_interaction(spec, 15.0) == doctest::Approx(0.566827766599).epsilon(1e-10));
  CHECK(onsite_interaction(spec, 50.0) == doctest::Approx(0.765897765977).epsilon(1e-10));
  CHECK(onsite_interaction(spec, 50.0) / onsite_interaction(spec, 15.0) ==
        doctest::Approx(std::pow(50.0 / 15.0, 0.25)).epsilon(1e-13));
}

TEST_CASE("energy hierarchy omega >> U >> J at operating depth") {
  LatticeSpec spec;
  const double w = site_energy(spec, 15.0, 0);
  const double u = onsite_interaction(spec, 15.0);
  const double j = tunneling(spec, 15.0);
  CHECK(w == doctest::Approx(2.0 * std::sqrt(15.0)).epsilon(1e-13));
  CHECK(w / u > 10.0);
  CHECK(u / j > 100.0);
}

TEST_CASE("site offsets from link offsets and back") {
  LatticeSpec spec;
  spec.delta = {-0.1, 0.3, -0.4, 0.2};
  const auto site = spec.site_offsets();
  REQUIRE(site.size() == 5);
  CHECK(site[0] == 0.0);
  CHECK(site[1] == doctest::Approx(-0.1));
  CHECK(site[2] == doctest::Approx(0.2));
  CHECK(site[3] == doctest::Approx(-0.2));
  CHECK(site[4] == doctest::Approx(0.0));
  const auto link = spec.link_offsets();
  REQUIRE(link.size() == 4);
  for (int j = 0; j < 4; ++j) CHECK(link[j] == doctest::Approx(spec.delta[j]).epsilon(1e-14));

  LatticeSpec abs_spec;
  abs_spec.v_ext_site = {0.0, -0.1, 0.2, -0.2, 0.0};
  const auto link2 = abs_spec.link_offsets();
  for (int j = 0; j < 4; ++j) CHECK(link2[j] == doctest::Approx(spec.delta[j]).epsilon(1e-14));

  const double shifted = site_energy(spec, 15.0, 1);
  CHECK(shifted == doctest::Approx(2.0 * std::sqrt(15.0) - 0.1).epsilon(1e-13));
}

TEST_CASE("validation rejects malformed lattices") {
  LatticeSpec spec;
  spec.n_sites = 1;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = LatticeSpec{};
  spec.v_min = 20.0;
  spec.v_max = 15.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = LatticeSpec{};
  spec.delta = {0.1, 0.2};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = LatticeSpec{};
  spec.delta = {0.1, 0.0, 0.0, 0.0};
  spec.v_ext_site = {0.0, 0.1, 0.1, 0.1, 0.1};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("regime warnings flag offsets large against the depth") {
  LatticeSpec spec;
  spec.delta = {-0.1, 0.3, -0.4, 0.2};
  CHECK(spec.warnings().empty());
  spec.v_min = 3.0;
  CHECK_FALSE(spec.warnings().empty());
}

TEST_CASE("exponential fit: anchor, slope, recorded residual") {
  LatticeSpec spec;
  const TunnelingFit fit = fit_tunneling(spec);
  CHECK(fit.j_max == doctest::Approx(tunneling(spec, 15.0)).epsilon(1e-13));
  CHECK(fit.beta == doctest::Approx(0.188795291579).epsilon(1e-8));
  CHECK(fit.grid_points == 36);
  // The single exponential strains over a 35 E_r window; the misfit is
  // recorded, not thrown, because the drive construction needs the scale.
  CHECK(fit.max_rel_residual == doctest::Approx(0.536861).epsilon(1e-3));
  CHECK(fitted_tunneling(fit, spec.v_min) == doctest::Approx(fit.j_max).epsilon(1e-13));
  CHECK(fitted_tunneling(fit, 20.0) ==
        doctest::Approx(fit.j_max * std::exp(-5.0 * fit.beta)).epsilon(1e-13));
}

TEST_CASE("fit survives the shallow operating depth") {
  LatticeSpec spec;
  spec.v_min = 5.0;
  const TunnelingFit fit = fit_tunneling(spec);
  CHECK(fit.j_max == doctest::Approx(2.86012398468e-2).epsilon(1e-9));
  CHECK(fit.beta == doctest::Approx(0.207403496342).epsilon(1e-8));
  CHECK(fit.max_rel_residual > 1.0);  // recorded ansatz strain, still usable
}

TEST_CASE("degenerate fit window refused") {
  LatticeSpec spec;
  spec.v_min = 15.0;
  spec.v_max = 15.0;
  CHECK_THROWS_AS(fit_tunneling(spec), PhysicsError);
}

TEST_CASE("params_at_depth assembles per-site coefficients") {
  LatticeSpec spec;
  spec.delta = {-0.1, 0.3, -0.4, 0.2};
  const TunnelingFit fit = fit_tunneling(spec);
  const BoseHubbardParams p = params_at_depth(spec, &fit, 15.0);
  REQUIRE(p.omega.size() == 5);
  REQUIRE(p.u.size() == 5);
  REQUIRE(p.j.size() == 4);
  CHECK(p.omega[1] - p.omega[0] == doctest::Approx(-0.1).epsilon(1e-12));
  for (double u : p.u) CHECK(u == doctest::Approx(onsite_interaction(spec, 15.0)).epsilon(1e-13));
  for (double j : p.j) CHECK(j == doctest::Approx(fit.j_max).epsilon(1e-13));

  const BoseHubbardParams q = params_at_depth(spec, nullptr, 15.0, true);
  for (double j : q.j) CHECK(j == doctest::Approx(tunneling(spec, 15.0)).epsilon(1e-13));
}

TEST_CASE("gauge_out_uniform keeps link differences") {
  LatticeSpec spec;
  spec.delta = {-0.1, 0.3, -0.4, 0.2};
  const TunnelingFit fit = fit_tunneling(spec);
  const BoseHubbardParams p = params_at_depth(spec, &fit, 15.0);
  const BoseHubbardParams g = gauge_out_uniform(p);
  for (int j = 1; j < 5; ++j)
    CHECK(g.omega[j] - g.omega[j - 1] ==
          doctest::Approx(p.omega[j] - p.omega[j - 1]).epsilon(1e-12));
  CHECK(std::abs(g.omega[0]) < std::abs(p.omega[0]));
}

TEST_CASE("recoil energy is display-scale only") {
  // hbar^2 pi^2 / (2 m a^2) for 87Rb at 640 nm spacing, about h * 1.4 kHz.
  LatticeSpec spec;
  CHECK(recoil_energy_si(spec) == doctest::Approx(9.285e-31).epsilon(0.01));
}

}  // TEST_SUITE
