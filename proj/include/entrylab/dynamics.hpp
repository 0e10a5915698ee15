#pragma once

// Three-degree-of-freedom entry dynamics about a rotating Mars.
//
// Truth propagation uses Cartesian equations in the planet-fixed frame; the
// spherical form is provided for guidance and as an independent cross-check.

#include <numbers>

#include <Eigen/Dense>

namespace entrylab::dynamics {

using Vec3 = Eigen::Vector3d;

inline constexpr double kDeg = std::numbers::pi / 180.0;

struct PlanetModel {
  double mu = 4.305e13;              // m^3/s^2
  double omega = 4.06e-3 * kDeg;     // rad/s
  double radius = 3396200.0;         // m

  double g0() const { return mu / (radius * radius); }
};

struct VehicleParams {
  double mass = 4.9e4;               // kg
  double ballistic_coefficient = 155; // kg/m^2
  double lift_to_drag = 0.15;
};

void validate(const PlanetModel& planet);
void validate(const VehicleParams& vehicle);

/// Planet-fixed position and planet-relative velocity.
struct CartesianState {
  Vec3 r = Vec3::Zero();
  Vec3 v = Vec3::Zero();

  CartesianState& operator+=(const CartesianState& o) {
    r += o.r;
    v += o.v;
    return *this;
  }
  friend CartesianState operator+(CartesianState a, const CartesianState& b) { return a += b; }
  friend CartesianState operator*(double s, const CartesianState& a) { return {s * a.r, s * a.v}; }
};

/// Radius, longitude, latitude, speed, flight-path angle (positive up) and
/// heading (clockwise from north). Angles in radians.
struct SphericalState {
  double r = 0.0;
  double lon = 0.0;
  double lat = 0.0;
  double v = 0.0;
  double fpa = 0.0;
  double heading = 0.0;

  SphericalState& operator+=(const SphericalState& o) {
    r += o.r;
    lon += o.lon;
    lat += o.lat;
    v += o.v;
    fpa += o.fpa;
    heading += o.heading;
    return *this;
  }
  friend SphericalState operator+(SphericalState a, const SphericalState& b) { return a += b; }
  friend SphericalState operator*(double s, const SphericalState& a) {
    return {s * a.r, s * a.lon, s * a.lat, s * a.v, s * a.fpa, s * a.heading};
  }
};

/// Lift and drag magnitudes and the total aerodynamic acceleration vector.
struct AeroAccel {
  double lift = 0.0;
  double drag = 0.0;
  Vec3 accel = Vec3::Zero();
};

/// Drag D = rho V^2 / (2 beta) along -V, lift L = D (L/D) rotated by the bank
/// angle about V. Positive bank rotates lift to the right of the velocity
/// (heading increases). Throws DomainError when r is parallel to V or V = 0.
AeroAccel aero_accels(const CartesianState& state, double bank, double density,
                      const VehicleParams& vehicle);

/// Lift/drag magnitudes only (no geometry).
AeroAccel aero_magnitudes(double speed, double density, const VehicleParams& vehicle);

CartesianState cartesian_derivatives(const CartesianState& state, double bank, double density,
                                     const VehicleParams& vehicle, const PlanetModel& planet);

/// All six spherical equations including Coriolis and centripetal terms.
/// Throws DomainError at the poles or for cos(fpa) = 0.
SphericalState spherical_derivatives(const SphericalState& state, double bank, double density,
                                     const VehicleParams& vehicle, const PlanetModel& planet);

/// Throws DomainError for |r| = 0, V = 0 or a polar position.
SphericalState cart_to_spherical(const CartesianState& state);
CartesianState spherical_to_cart(const SphericalState& state);

/// Specific mechanical energy in the rotating frame including the centrifugal
/// potential (the Jacobi integral); conserved in vacuum.
double jacobi_energy(const CartesianState& state, const PlanetModel& planet);

/// Classical fourth-order Runge-Kutta step for an autonomous system y' = f(y).
template <class State, class Derivative>
State rk4_step(Derivative&& f, const State& y, double dt) {
  const State k1 = f(y);
  const State k2 = f(y + (0.5 * dt) * k1);
  const State k3 = f(y + (0.5 * dt) * k2);
  const State k4 = f(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// ---------------------------------------------------------------------------
// Great-circle helpers (radians)

/// Central angle between two surface points.
double great_circle_angle(double lon1, double lat1, double lon2, double lat2);

/// Initial azimuth (clockwise from north) of the great circle from point 1 to 2.
double great_circle_azimuth(double lon1, double lat1, double lon2, double lat2);

/// Wrap an angle to (-pi, pi].
double wrap_pi(double angle);

}  // namespace entrylab::dynamics
