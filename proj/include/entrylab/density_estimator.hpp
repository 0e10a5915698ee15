#pragma once

#include <array>
#include <string_view>

#include "entrylab/dynamics.hpp"

namespace entrylab {

inline constexpr std::size_t kFeatureCount = 10;

/// (r, lon, lat, V, fpa, heading, a_x, a_y, a_z, log10 P02) in SI units and
/// radians; acceleration in the planet-fixed frame.
using FeatureVector = std::array<double, kFeatureCount>;

/// What the vehicle senses at one guidance cycle.
struct Measurement {
  double time = 0.0;
  dynamics::SphericalState nav;
  dynamics::Vec3 accel = dynamics::Vec3::Zero();
  double lift = 0.0;  // sensed lift magnitude, m/s^2
  double drag = 0.0;  // sensed drag magnitude, m/s^2
  FeatureVector features{};
};

/// Density model queried by the guidance predictor.
///
/// density_at must return a finite positive value for any altitude in
/// [0, 130] km. observe is called at most once per guidance cycle, before the
/// predictor runs. One instance serves one trajectory.
class DensityEstimator {
 public:
  virtual ~DensityEstimator() = default;

  virtual double density_at(double h_km) const = 0;

  /// Multipliers applied to the predicted lift and drag accelerations.
  virtual double lift_scale() const { return 1.0; }
  virtual double drag_scale() const { return 1.0; }

  virtual void observe(const Measurement& /*m*/) {}

  virtual std::string_view name() const = 0;
};

}  // namespace entrylab
