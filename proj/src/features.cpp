#include "entrylab/features.hpp"

#include <cmath>

#include "entrylab/errors.hpp"

namespace entrylab::pipeline {

double stagnation_pressure(double p, double mach, const atmos::GasModel& gas, double shock_mach) {
  if (!(p >= 0.0) || !(mach >= 0.0)) throw DomainError("stagnation_pressure: negative pressure or Mach");
  const double g = gas.gamma;
  const double m2 = mach * mach;
  const double p01 = p * std::pow(1.0 + 0.5 * (g - 1.0) * m2, g / (g - 1.0));
  if (mach < shock_mach) return p01;
  const double a = (g + 1.0) * m2 / ((g - 1.0) * m2 + 2.0);
  const double b = (g + 1.0) / (2.0 * g * m2 - (g - 1.0));
  return p01 * std::pow(a, g / (g - 1.0)) * std::pow(b, 1.0 / (g - 1.0));
}

double stagnation_pressure_feature(const dynamics::SphericalState& s, const atmos::AtmosphereProfile& profile,
                                   const dynamics::PlanetModel& planet) {
  const double h_km = (s.r - planet.radius) / 1000.0;
  const auto& gas = profile.gas();
  const double mach = s.v / atmos::speed_of_sound(gas, h_km);
  return std::log10(stagnation_pressure(atmos::pressure_at(gas, profile, h_km), mach, gas));
}

FeatureVector make_features(const dynamics::SphericalState& s, const dynamics::Vec3& a, double log10_p02) {
  return {s.r, s.lon, s.lat, s.v, s.fpa, s.heading, a.x(), a.y(), a.z(), log10_p02};
}

}  // namespace entrylab::pipeline
