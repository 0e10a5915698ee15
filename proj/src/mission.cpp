#include "entrylab/mission.hpp"

#include <cmath>

#include "entrylab/errors.hpp"

namespace entrylab {

using dynamics::kDeg;

dynamics::SphericalState Mission::entry_spherical(const dynamics::PlanetModel& planet) const {
  dynamics::SphericalState s;
  s.r = planet.radius + entry_altitude_km * 1000.0;
  s.lon = entry_lon_deg * kDeg;
  s.lat = entry_lat_deg * kDeg;
  s.v = entry_speed;
  s.fpa = entry_fpa_deg * kDeg;
  s.heading = entry_heading_deg ? *entry_heading_deg * kDeg
                                : dynamics::great_circle_azimuth(s.lon, s.lat, target_lon_deg * kDeg,
                                                                 target_lat_deg * kDeg);
  return s;
}

dynamics::CartesianState Mission::entry_state(const dynamics::PlanetModel& planet) const {
  return dynamics::spherical_to_cart(entry_spherical(planet));
}

void validate(const Mission& m) {
  if (!(m.entry_altitude_km > m.target_altitude_km)) {
    throw ConfigError("entry altitude must exceed target altitude");
  }
  if (!(m.target_altitude_km >= 0.0)) throw ConfigError("target altitude must be non-negative");
  if (!(m.entry_speed > m.target_speed) || !(m.target_speed > 0.0)) {
    throw ConfigError("entry speed must exceed a positive target speed");
  }
  if (!(std::abs(m.entry_lat_deg) < 90.0) || !(std::abs(m.target_lat_deg) < 90.0)) {
    throw ConfigError("entry and target latitudes must be off the poles");
  }
  if (!(m.entry_fpa_deg < 0.0 && m.entry_fpa_deg > -90.0)) {
    throw ConfigError("entry flight-path angle must lie in (-90, 0) deg");
  }
  if (!(m.target_range_deg >= 0.0)) throw ConfigError("target range-to-go must be non-negative");
}

}  // namespace entrylab
