#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "support.hpp"

#include "entrylab/atmos.hpp"
#include "entrylab/dynamics.hpp"
#include "entrylab/errors.hpp"
#include "entrylab/mission.hpp"

using namespace entrylab;
using namespace entrylab::dynamics;
using testing::rel_err;

namespace {

CartesianState sample_state() {
  return spherical_to_cart({3396200.0 + 60e3, 1.2, 0.6, 3500.0, -8.0 * kDeg, 70.0 * kDeg});
}

}  // namespace

TEST_CASE("aerodynamic accelerations") {
  const VehicleParams veh;
  const auto s = sample_state();
  const auto vac = aero_accels(s, 0.3, 0.0, veh);
  CHECK(vac.lift == 0.0);
  CHECK(vac.drag == 0.0);
  CHECK(vac.accel.norm() == 0.0);

  const auto m = aero_magnitudes(4000.0, 1e-2, veh);
  CHECK(rel_err(m.drag, 1e-2 * 4000.0 * 4000.0 / (2.0 * 155.0)) < 1e-15);
  CHECK(m.drag == doctest::Approx(516.1).epsilon(1e-4));
  CHECK(rel_err(m.lift, 0.15 * m.drag) < 1e-15);

  for (double bank : {0.0, 0.4, -1.1, 2.5}) {
    const auto a = aero_accels(s, bank, 3e-4, veh);
    const Vec3 vhat = s.v.normalized();
    CHECK(rel_err(a.accel.dot(vhat), -a.drag) < 1e-12);
    CHECK(rel_err(a.accel.squaredNorm(), a.lift * a.lift + a.drag * a.drag) < 1e-12);
  }

  // Zero bank: lift in the (r, V) plane, perpendicular to V.
  const auto a0 = aero_accels(s, 0.0, 3e-4, veh);
  const Vec3 lift = a0.accel + a0.drag * s.v.normalized();
  CHECK(std::abs(lift.dot(s.v)) < 1e-12 * lift.norm() * s.v.norm());
  CHECK(std::abs(lift.dot(s.r.cross(s.v))) < 1e-9 * lift.norm() * s.r.cross(s.v).norm());
  CHECK(lift.dot(s.r) > 0.0);

  // Positive bank turns right: heading rate positive in the spherical form.
  const auto sph = cart_to_spherical(s);
  const PlanetModel still{4.305e13, 0.0, 3396200.0};
  const double right = spherical_derivatives(sph, 0.5, 3e-4, veh, still).heading;
  const double none = spherical_derivatives(sph, 0.0, 3e-4, veh, still).heading;
  CHECK(right > none);
}

TEST_CASE("cartesian equations of motion") {
  const VehicleParams veh;
  const PlanetModel still{4.305e13, 0.0, 3396200.0};
  const auto s = sample_state();
  const auto d = cartesian_derivatives(s, 0.2, 0.0, veh, still);
  const double r = s.r.norm();
  const Vec3 g = -still.mu * s.r / (r * r * r);
  CHECK((d.v - g).norm() < 1e-14 * g.norm());
  CHECK((d.r - s.v).norm() == 0.0);

  const PlanetModel mars;
  CartesianState rest{s.r, Vec3::Zero()};
  const Vec3 omega(0.0, 0.0, mars.omega);
  const Vec3 expected = -mars.mu * s.r / (r * r * r) - omega.cross(omega.cross(s.r));
  const auto dr = cartesian_derivatives(rest, 0.0, 0.0, veh, mars);
  CHECK((dr.v - expected).norm() < 1e-13 * expected.norm());
}

TEST_CASE("spherical equations of motion") {
  const VehicleParams veh;
  const PlanetModel still{4.305e13, 0.0, 3396200.0};
  const SphericalState s{3396200.0 + 50e3, 0.3, 0.0, 3000.0, 0.0, 60.0 * kDeg};
  const auto d = spherical_derivatives(s, 0.0, 0.0, veh, still);
  const double g = still.mu / (s.r * s.r);
  CHECK(std::abs(d.v) < 1e-15);
  CHECK(rel_err(d.fpa, (s.v * s.v / s.r - g) / s.v) < 1e-13);
  CHECK(std::abs(d.heading) < 1e-18);
  CHECK_THROWS_AS(spherical_derivatives({s.r, 0.0, std::numbers::pi / 2, 3000.0, 0.0, 0.0}, 0.0, 0.0, veh, still),
                  DomainError);
}

TEST_CASE("frame conversions") {
  CHECK_THROWS_AS(cart_to_spherical({Vec3(0, 0, 3.4e6), Vec3(100, 0, 0)}), DomainError);
  const auto east = cart_to_spherical(spherical_to_cart({3.4e6, 0.7, 0.0, 2000.0, 0.0, std::numbers::pi / 2}));
  CHECK(east.heading == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(std::abs(east.fpa) < 1e-14);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const SphericalState s{3396200.0 + 150e3 * u(rng), -3.0 + 6.0 * u(rng), -1.4 + 2.8 * u(rng),
                           100.0 + 5000.0 * u(rng), -1.4 + 2.8 * u(rng), -3.0 + 6.0 * u(rng)};
    const auto back = cart_to_spherical(spherical_to_cart(s));
    REQUIRE(rel_err(back.r, s.r) < 1e-13);
    REQUIRE(rel_err(back.v, s.v) < 1e-12);
    REQUIRE(std::abs(back.lon - s.lon) < 1e-12);
    REQUIRE(std::abs(back.lat - s.lat) < 1e-12);
    REQUIRE(std::abs(back.fpa - s.fpa) < 1e-10);
    REQUIRE(std::abs(wrap_pi(back.heading - s.heading)) < 1e-10);
  }
}

TEST_CASE("rk4 step") {
  auto zero = [](double) { return 0.0; };
  CHECK(rk4_step(zero, 1.25, 0.1) == 1.25);
  auto growth = [](double y) { return y; };
  const double y1 = rk4_step(growth, 1.0, 0.1);
  CHECK(std::abs(y1 - std::exp(0.1)) < 0.1 * 0.1 * 0.1 * 0.1 * 0.1);
  CHECK(std::abs(y1 - std::exp(0.1)) > 0.0);

  // Harmonic oscillator: global error falls ~16x per step halving.
  // Reference stepper written out by hand.
  auto error_at = [](int n) {
    std::array<double, 2> y{1.0, 0.0};
    const double dt = 10.0 / n;
    auto f = [](const std::array<double, 2>& s) { return std::array<double, 2>{s[1], -s[0]}; };
    auto add = [](std::array<double, 2> a, const std::array<double, 2>& b, double s) {
      a[0] += s * b[0];
      a[1] += s * b[1];
      return a;
    };
    for (int k = 0; k < n; ++k) {
      const auto k1 = f(y);
      const auto k2 = f(add(y, k1, dt / 2));
      const auto k3 = f(add(y, k2, dt / 2));
      const auto k4 = f(add(y, k3, dt));
      y[0] += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
      y[1] += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    return std::hypot(y[0] - std::cos(10.0), y[1] + std::sin(10.0));
  };
  // The library stepper on the same problem, expressed with CartesianState.
  auto lib_error = [](int n) {
    CartesianState y{Vec3(1, 0, 0), Vec3(0, 0, 0)};
    auto f = [](const CartesianState& s) { return CartesianState{s.v, -s.r}; };
    const double dt = 10.0 / n;
    for (int k = 0; k < n; ++k) y = rk4_step(f, y, dt);
    return std::hypot(y.r.x() - std::cos(10.0), y.v.x() + std::sin(10.0));
  };
  const double ratio = lib_error(200) / lib_error(400);
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
  CHECK(rel_err(lib_error(200), error_at(200)) < 1e-9);
}

TEST_CASE("vacuum energy conservation") {
  const VehicleParams veh;
  for (const PlanetModel planet : {PlanetModel{4.305e13, 0.0, 3396200.0}, PlanetModel{}}) {
    const double r = planet.radius + 300e3;
    // Circular in the inertial frame, seen from the rotating frame.
    const double vc = std::sqrt(planet.mu / r);
    CartesianState s{Vec3(r, 0, 0), Vec3(0, vc - planet.omega * r, 0)};
    auto f = [&](const CartesianState& y) { return cartesian_derivatives(y, 0.0, 0.0, veh, planet); };
    const double e0 = jacobi_energy(s, planet);
    for (int k = 0; k < 1000; ++k) s = rk4_step(f, s, 0.1);
    CHECK(rel_err(jacobi_energy(s, planet), e0) < 1e-9);
  }
}

TEST_CASE("cartesian and spherical propagation agree") {
  const VehicleParams veh;
  const PlanetModel planet;
  const Mission mission;
  const atmos::ExponentialModel exp_model;
  const double bank = 40.0 * kDeg;
  auto rho = [&](double r) { return atmos::exp_density(exp_model, std::max(0.0, (r - planet.radius) / 1000.0)); };

  auto sph = mission.entry_spherical(planet);
  auto cart = spherical_to_cart(sph);
  auto fc = [&](const CartesianState& y) { return cartesian_derivatives(y, bank, rho(y.r.norm()), veh, planet); };
  auto fs = [&](const SphericalState& y) { return spherical_derivatives(y, bank, rho(y.r), veh, planet); };
  for (int k = 0; k < 1000; ++k) {
    cart = rk4_step(fc, cart, 0.1);
    sph = rk4_step(fs, sph, 0.1);
  }
  const auto conv = cart_to_spherical(cart);
  CHECK(rel_err(conv.r, sph.r) < 1e-6);
  CHECK(rel_err(conv.lon, sph.lon) < 1e-6);
  CHECK(rel_err(conv.lat, sph.lat) < 1e-6);
  CHECK(rel_err(conv.v, sph.v) < 1e-6);
  CHECK(rel_err(conv.fpa, sph.fpa) < 1e-6);
  CHECK(rel_err(conv.heading, sph.heading) < 1e-6);
}

TEST_CASE("great circle helpers") {
  CHECK(great_circle_azimuth(0.0, 0.0, 0.5, 0.0) == doctest::Approx(std::numbers::pi / 2).epsilon(1e-14));
  CHECK(great_circle_angle(0.0, 0.0, 0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(great_circle_azimuth(0.0, 0.0, 0.0, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(wrap_pi(3 * std::numbers::pi) == doctest::Approx(std::numbers::pi));
}
