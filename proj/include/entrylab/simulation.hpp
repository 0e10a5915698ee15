#pragma once

// Closed-loop entry simulation: Cartesian truth propagation with the guidance
// called at its own frequency until the target energy is crossed.

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "entrylab/atmos.hpp"
#include "entrylab/density_estimator.hpp"
#include "entrylab/fnpeg.hpp"
#include "entrylab/mission.hpp"

namespace entrylab::sim {

struct SimSetup {
  Mission mission;
  dynamics::VehicleParams vehicle;
  dynamics::PlanetModel planet;
  fnpeg::GuidanceConfig guidance;
  double dt = 0.1;            // s
  double max_time = 3000.0;   // s
  bool record_trajectory = false;
  /// Applied to the measurement handed to the estimator (noise injection).
  /// Guidance itself works on the navigation truth.
  std::function<void(Measurement&)> corrupt;
};

void validate(const SimSetup& setup);

/// One guidance cycle.
struct CycleLog {
  double time = 0.0;
  dynamics::CartesianState truth;
  dynamics::SphericalState nav;
  dynamics::Vec3 accel = dynamics::Vec3::Zero();
  double lift = 0.0;
  double drag = 0.0;
  double load = 0.0;
  double density = 0.0;        // truth
  bool observed = false;       // estimator received a measurement this cycle
  fnpeg::GuidanceCommand command;
};

/// One integration step of the truth trajectory.
struct TrajectoryRow {
  double t, r, lon, lat, v, fpa, heading, h_km, ax, ay, az, bank, density;
};

struct SimResult {
  bool ok = false;
  std::string failure;
  double final_time = 0.0;
  dynamics::SphericalState final_state;
  double final_altitude_km = 0.0;
  double range_to_go = 0.0;    // signed, rad; positive = undershoot
  double miss_km = 0.0;        // range_to_go * R
  int reversals = 0;
  bool altitude_monotone = true;
  std::vector<CycleLog> cycles;
  /// Features handed to the estimator (after corruption), one per observed cycle.
  std::vector<FeatureVector> features;
  std::vector<double> feature_times;
  std::vector<TrajectoryRow> trajectory;  // only with record_trajectory
};

/// Runs one trajectory. Failures (ground impact, time-out, numeric trouble)
/// are reported through ok/failure; configuration errors throw.
SimResult simulate(const SimSetup& setup, const atmos::AtmosphereProfile& truth,
                   DensityEstimator& estimator);

/// Measurement at a truth state with the given bank applied.
Measurement measure(double time, const dynamics::CartesianState& state, double bank,
                    const atmos::AtmosphereProfile& truth, const dynamics::VehicleParams& vehicle,
                    const dynamics::PlanetModel& planet);

/// CSV with t,r,lon,lat,V,fpa,heading,h,a_x,a_y,a_z,sigma_cmd,rho_true followed
/// by a guidance telemetry CSV (<stem>_guidance.csv) and a JSON manifest.
void write_trajectory(const std::filesystem::path& stem, const SimResult& result);

}  // namespace entrylab::sim
