#include "entrylab/noise.hpp"

#include <cmath>

#include "entrylab/errors.hpp"

namespace entrylab::evalmc {

void validate(const NoiseSpec& s) {
  if (!(s.r >= 0.0) || !(s.angle_deg >= 0.0) || !(s.v >= 0.0) || !(s.path_deg >= 0.0) || !(s.accel_g >= 0.0) ||
      !(s.pressure_fraction >= 0.0)) {
    throw ConfigError("noise levels must be non-negative");
  }
}

FeatureVector inject_noise(const FeatureVector& x, const NoiseSpec& s, double g0, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double sig[9] = {s.r / 3.0,
                         s.angle_deg * dynamics::kDeg / 3.0,
                         s.angle_deg * dynamics::kDeg / 3.0,
                         s.v / 3.0,
                         s.path_deg * dynamics::kDeg / 3.0,
                         s.path_deg * dynamics::kDeg / 3.0,
                         s.accel_g * g0 / 3.0,
                         s.accel_g * g0 / 3.0,
                         s.accel_g * g0 / 3.0};
  FeatureVector y = x;
  for (int j = 0; j < 9; ++j) y[j] += sig[j] * n(rng);
  const double factor = 1.0 + s.pressure_fraction / 3.0 * n(rng);
  if (!(factor > 0.0)) throw NumericError("pressure noise produced a non-positive pressure");
  y[9] += std::log10(factor);
  return y;
}

void corrupt_measurement(Measurement& m, const NoiseSpec& s, double g0, std::mt19937_64& rng) {
  m.features = inject_noise(m.features, s, g0, rng);
  const auto& f = m.features;
  m.nav = {f[0], f[1], f[2], f[3], f[4], f[5]};
  m.accel = dynamics::Vec3(f[6], f[7], f[8]);
  const dynamics::Vec3 vhat = dynamics::spherical_to_cart(m.nav).v.normalized();
  m.drag = -m.accel.dot(vhat);
  m.lift = (m.accel + m.drag * vhat).norm();
}

}  // namespace entrylab::evalmc
