#include "entrylab/dynamics.hpp"

#include <cmath>

#include "entrylab/errors.hpp"

namespace entrylab::dynamics {

void validate(const PlanetModel& p) {
  if (!(p.mu > 0.0) || !(p.radius > 0.0) || !(p.omega >= 0.0)) {
    throw DomainError("planet model parameters must be positive");
  }
}

void validate(const VehicleParams& v) {
  if (!(v.ballistic_coefficient > 0.0)) throw DomainError("ballistic coefficient must be positive");
  if (!(v.lift_to_drag >= 0.0)) throw DomainError("L/D must be non-negative");
  if (!(v.mass > 0.0)) throw DomainError("mass must be positive");
}

AeroAccel aero_magnitudes(double speed, double density, const VehicleParams& vehicle) {
  AeroAccel out;
  out.drag = density * speed * speed / (2.0 * vehicle.ballistic_coefficient);
  out.lift = out.drag * vehicle.lift_to_drag;
  return out;
}

AeroAccel aero_accels(const CartesianState& state, double bank, double density,
                      const VehicleParams& vehicle) {
  const double speed = state.v.norm();
  if (density == 0.0) return {};
  const Vec3 h = state.r.cross(state.v);
  const double hn = h.norm();
  if (!(speed > 0.0) || !(hn > 1e-12 * state.r.norm() * speed)) {
    throw DomainError("aero_accels: position parallel to velocity or zero speed");
  }
  AeroAccel out = aero_magnitudes(speed, density, vehicle);
  // In-plane "up" direction normal to V, and the right-hand lateral direction.
  const Vec3 up = state.v.cross(h) / (speed * hn);
  const Vec3 right = -h / hn;
  const Vec3 lift_dir = std::cos(bank) * up + std::sin(bank) * right;
  out.accel = out.lift * lift_dir - out.drag * state.v / speed;
  return out;
}

CartesianState cartesian_derivatives(const CartesianState& state, double bank, double density,
                                     const VehicleParams& vehicle, const PlanetModel& planet) {
  const double rn = state.r.norm();
  const Vec3 omega(0.0, 0.0, planet.omega);
  const AeroAccel aero = aero_accels(state, bank, density, vehicle);
  CartesianState d;
  d.r = state.v;
  d.v = -planet.mu / (rn * rn * rn) * state.r + aero.accel - 2.0 * omega.cross(state.v) -
        omega.cross(omega.cross(state.r));
  return d;
}

SphericalState spherical_derivatives(const SphericalState& s, double bank, double density,
                                     const VehicleParams& vehicle, const PlanetModel& planet) {
  const double cphi = std::cos(s.lat);
  const double cg = std::cos(s.fpa);
  if (!(std::abs(cphi) > 1e-12)) throw DomainError("spherical dynamics singular at the pole");
  if (!(std::abs(cg) > 1e-12)) throw DomainError("spherical dynamics singular at vertical flight");
  if (!(s.v > 0.0) || !(s.r > 0.0)) throw DomainError("spherical dynamics need r > 0 and V > 0");

  const double sphi = std::sin(s.lat);
  const double sg = std::sin(s.fpa);
  const double spsi = std::sin(s.heading);
  const double cpsi = std::cos(s.heading);
  const double w = planet.omega;
  const double g = planet.mu / (s.r * s.r);
  const AeroAccel a = aero_magnitudes(s.v, density, vehicle);

  SphericalState d;
  d.r = s.v * sg;
  d.lon = s.v * cg * spsi / (s.r * cphi);
  d.lat = s.v * cg * cpsi / s.r;
  d.v = -a.drag - g * sg + w * w * s.r * cphi * (sg * cphi - cg * sphi * cpsi);
  d.fpa = (a.lift * std::cos(bank) - g * cg + s.v * s.v / s.r * cg +
           2.0 * w * s.v * cphi * spsi + w * w * s.r * cphi * (cg * cphi + sg * cpsi * sphi)) /
          s.v;
  d.heading = (a.lift * std::sin(bank) / cg + s.v * s.v / s.r * cg * spsi * std::tan(s.lat) -
               2.0 * w * s.v * (std::tan(s.fpa) * cpsi * cphi - sphi) +
               w * w * s.r / cg * spsi * sphi * cphi) /
              s.v;
  return d;
}

SphericalState cart_to_spherical(const CartesianState& c) {
  const double rn = c.r.norm();
  const double vn = c.v.norm();
  if (!(rn > 0.0)) throw DomainError("cart_to_spherical: zero radius");
  if (!(vn > 0.0)) throw DomainError("cart_to_spherical: zero velocity");
  const double rho_xy = std::hypot(c.r.x(), c.r.y());
  if (!(rho_xy > 1e-12 * rn)) throw DomainError("cart_to_spherical: polar position");

  SphericalState s;
  s.r = rn;
  s.lon = std::atan2(c.r.y(), c.r.x());
  s.lat = std::atan2(c.r.z(), rho_xy);
  s.v = vn;
  const double cl = std::cos(s.lon), sl = std::sin(s.lon);
  const double cp = std::cos(s.lat), sp = std::sin(s.lat);
  const Vec3 east(-sl, cl, 0.0);
  const Vec3 north(-sp * cl, -sp * sl, cp);
  const Vec3 up(cp * cl, cp * sl, sp);
  const double ve = c.v.dot(east), vnorth = c.v.dot(north), vu = c.v.dot(up);
  s.fpa = std::atan2(vu, std::hypot(ve, vnorth));
  s.heading = std::atan2(ve, vnorth);
  return s;
}

CartesianState spherical_to_cart(const SphericalState& s) {
  const double cl = std::cos(s.lon), sl = std::sin(s.lon);
  const double cp = std::cos(s.lat), sp = std::sin(s.lat);
  const Vec3 east(-sl, cl, 0.0);
  const Vec3 north(-sp * cl, -sp * sl, cp);
  const Vec3 up(cp * cl, cp * sl, sp);
  const double cg = std::cos(s.fpa);
  CartesianState c;
  c.r = s.r * up;
  c.v = s.v * (std::sin(s.fpa) * up + cg * std::sin(s.heading) * east + cg * std::cos(s.heading) * north);
  return c;
}

double jacobi_energy(const CartesianState& c, const PlanetModel& planet) {
  const Vec3 omega(0.0, 0.0, planet.omega);
  return 0.5 * c.v.squaredNorm() - planet.mu / c.r.norm() - 0.5 * omega.cross(c.r).squaredNorm();
}

double great_circle_angle(double lon1, double lat1, double lon2, double lat2) {
  // Haversine-free vector form: well conditioned for small and large angles.
  const Vec3 a(std::cos(lat1) * std::cos(lon1), std::cos(lat1) * std::sin(lon1), std::sin(lat1));
  const Vec3 b(std::cos(lat2) * std::cos(lon2), std::cos(lat2) * std::sin(lon2), std::sin(lat2));
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double great_circle_azimuth(double lon1, double lat1, double lon2, double lat2) {
  const double dlon = lon2 - lon1;
  return std::atan2(std::sin(dlon) * std::cos(lat2),
                    std::cos(lat1) * std::sin(lat2) - std::sin(lat1) * std::cos(lat2) * std::cos(dlon));
}

double wrap_pi(double angle) {
  angle = std::remainder(angle, 2.0 * std::numbers::pi);
  return angle == -std::numbers::pi ? std::numbers::pi : angle;
}

}  // namespace entrylab::dynamics
