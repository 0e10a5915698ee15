#pragma once

// Measurement feature vector seen by the density network.

#include "entrylab/atmos.hpp"
#include "entrylab/density_estimator.hpp"
#include "entrylab/dynamics.hpp"

namespace entrylab::pipeline {

/// Normal-shock stagnation pressure behind the shock (Pa) from the freestream
/// static pressure and Mach number. The isentropic freestream stagnation
/// pressure is returned unchanged below `shock_mach` (default 1.2), where the
/// normal-shock relation is not applied.
double stagnation_pressure(double static_pressure, double mach, const atmos::GasModel& gas,
                           double shock_mach = 1.2);

/// log10 of the post-shock stagnation pressure at the given state.
double stagnation_pressure_feature(const dynamics::SphericalState& state,
                                   const atmos::AtmosphereProfile& profile,
                                   const dynamics::PlanetModel& planet);

/// (r, lon, lat, V, fpa, heading, a_x, a_y, a_z, log10 P02).
FeatureVector make_features(const dynamics::SphericalState& state, const dynamics::Vec3& accel,
                            double log10_p02);

}  // namespace entrylab::pipeline
