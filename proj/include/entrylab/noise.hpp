#pragma once

// Measurement noise on the feature vector.

#include <random>

#include "entrylab/density_estimator.hpp"
#include "entrylab/dynamics.hpp"

namespace entrylab::evalmc {

/// 3-sigma levels per feature.
struct NoiseSpec {
  double r = 5.0;                  // m
  double angle_deg = 8.4e-5;       // longitude, latitude
  double v = 1.0;                  // m/s
  double path_deg = 0.01;          // flight-path angle, heading
  double accel_g = 1e-7;           // in units of the planet's g0
  double pressure_fraction = 0.01; // multiplicative on P02

  static NoiseSpec zero() { return {0, 0, 0, 0, 0, 0}; }
};

void validate(const NoiseSpec& spec);

/// Zero-mean Gaussian noise with sigma = level / 3 on every component; the
/// pressure noise multiplies P02 by (1 + n) before the logarithm.
FeatureVector inject_noise(const FeatureVector& features, const NoiseSpec& spec, double g0, std::mt19937_64& rng);

/// Noisy copy of a measurement: features are corrupted and the navigation
/// state, acceleration and sensed lift/drag are rebuilt from them.
void corrupt_measurement(Measurement& m, const NoiseSpec& spec, double g0, std::mt19937_64& rng);

}  // namespace entrylab::evalmc
