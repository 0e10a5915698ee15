#pragma once

#include <optional>

#include "entrylab/dynamics.hpp"

namespace entrylab {

/// Entry interface and target conditions of the reference mission.
struct Mission {
  double entry_altitude_km = 130.0;
  double entry_speed = 4000.0;  // m/s
  double entry_lon_deg = 90.0;
  double entry_lat_deg = 45.0;
  double entry_fpa_deg = -15.0;  // not given with the mission; tuned so the nominal bank sits mid-range
  /// Defaults to the great-circle azimuth towards the target.
  std::optional<double> entry_heading_deg;

  double target_altitude_km = 11.0;
  double target_speed = 1214.0;  // m/s
  double target_lon_deg = 101.031;
  double target_lat_deg = 47.203;
  double target_range_deg = 0.0;

  dynamics::SphericalState entry_spherical(const dynamics::PlanetModel& planet) const;
  dynamics::CartesianState entry_state(const dynamics::PlanetModel& planet) const;

  double target_radius(const dynamics::PlanetModel& planet) const {
    return planet.radius + target_altitude_km * 1000.0;
  }
};

void validate(const Mission& mission);

}  // namespace entrylab
