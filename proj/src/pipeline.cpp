#include "entrylab/pipeline.hpp"

#include <cmath>
#include <iostream>

#include "entrylab/errors.hpp"
#include "entrylab/parallel.hpp"
#include "entrylab/seeds.hpp"

namespace entrylab::pipeline {

std::vector<FeatureVector> extract_features(const std::vector<sim::CycleLog>& cycles,
                                            const atmos::AtmosphereProfile& truth,
                                            const dynamics::PlanetModel& planet) {
  std::vector<FeatureVector> out;
  for (const auto& c : cycles) {
    if (!c.observed) continue;
    const auto nav = dynamics::cart_to_spherical(c.truth);
    out.push_back(make_features(nav, c.accel, stagnation_pressure_feature(nav, truth, planet)));
  }
  if (out.empty()) throw IngestError("trajectory log has no guidance-active cycles");
  return out;
}

atmos::PseudodensityProfile interpolate_targets(const atmos::AtmosphereProfile& truth, double hf) {
  const auto& grid = atmos::prediction_grid();
  atmos::PseudodensityProfile p;
  std::size_t first = 0;  // lowest node at or above the terminal altitude
  while (first < atmos::kGridNodes && grid[first] < hf) ++first;
  if (first + 1 >= atmos::kGridNodes) throw DomainError("terminal altitude leaves fewer than two grid nodes");
  for (std::size_t j = first; j < atmos::kGridNodes; ++j) p.eta[j] = atmos::pseudodensity(truth.density_at(grid[j]));
  const double slope = (p.eta[first + 1] - p.eta[first]) / (grid[first + 1] - grid[first]);
  for (std::size_t j = 0; j < first; ++j) {
    p.eta[j] = std::max(0.0, p.eta[first] + slope * (grid[j] - grid[first]));
  }
  return p;
}

NormalizationStats compute_norm_stats(const std::vector<TrajectorySample>& samples) {
  if (samples.empty()) throw DomainError("normalization needs at least one sample");
  const double K = static_cast<double>(samples.size());
  NormalizationStats s;
  s.feature_mean.assign(kFeatureCount, 0.0);
  s.feature_std.assign(kFeatureCount, 0.0);
  s.target_mean.assign(atmos::kGridNodes, 0.0);
  s.target_std.assign(atmos::kGridNodes, 0.0);
  for (const auto& x : samples) {
    if (x.features.empty()) throw DomainError("normalization: empty feature sequence");
    const double inv_n = 1.0 / static_cast<double>(x.features.size());
    for (const auto& f : x.features) {
      for (std::size_t j = 0; j < kFeatureCount; ++j) s.feature_mean[j] += f[j] * inv_n / K;
    }
    for (std::size_t j = 0; j < atmos::kGridNodes; ++j) s.target_mean[j] += x.target.eta[j] / K;
  }
  for (const auto& x : samples) {
    const double inv_n = 1.0 / static_cast<double>(x.features.size());
    for (const auto& f : x.features) {
      for (std::size_t j = 0; j < kFeatureCount; ++j) {
        const double d = f[j] - s.feature_mean[j];
        s.feature_std[j] += d * d * inv_n / K;
      }
    }
    for (std::size_t j = 0; j < atmos::kGridNodes; ++j) {
      const double d = x.target.eta[j] - s.target_mean[j];
      s.target_std[j] += d * d / K;
    }
  }
  auto guard = [](std::vector<double>& v, const char* what) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      v[j] = std::sqrt(v[j]);
      if (!(v[j] >= kStdGuard)) {
        std::cerr << "warning: " << what << ' ' << j << " has zero spread; std guarded to 1e-12\n";
        v[j] = kStdGuard;
      }
    }
  };
  guard(s.feature_std, "feature");
  guard(s.target_std, "target node");
  return s;
}

FeatureVector normalize_features(const FeatureVector& x, const NormalizationStats& s) {
  FeatureVector y;
  for (std::size_t j = 0; j < kFeatureCount; ++j) y[j] = (x[j] - s.feature_mean[j]) / s.feature_std[j];
  return y;
}

FeatureVector denormalize_features(const FeatureVector& x, const NormalizationStats& s) {
  FeatureVector y;
  for (std::size_t j = 0; j < kFeatureCount; ++j) y[j] = x[j] * s.feature_std[j] + s.feature_mean[j];
  return y;
}

atmos::NodeValues normalize_targets(const atmos::NodeValues& eta, const NormalizationStats& s) {
  atmos::NodeValues y;
  for (std::size_t j = 0; j < atmos::kGridNodes; ++j) y[j] = (eta[j] - s.target_mean[j]) / s.target_std[j];
  return y;
}

atmos::NodeValues denormalize_targets(const atmos::NodeValues& y, const NormalizationStats& s) {
  atmos::NodeValues eta;
  for (std::size_t j = 0; j < atmos::kGridNodes; ++j) eta[j] = y[j] * s.target_std[j] + s.target_mean[j];
  return eta;
}

std::uint64_t case_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, kAtmosphereStream, index);
}

CaseOutcome run_case(const CaseSetup& setup, std::uint64_t seed) {
  CaseOutcome out;
  out.case_seed = seed;
  std::mt19937_64 atmo_rng(seed);
  out.atmosphere = atmos::draw_sample(atmo_rng);
  out.truth = std::make_shared<const atmos::AtmosphereProfile>(
      atmos::generate_profile(out.atmosphere, setup.gas, setup.surrogate));

  auto ctx = setup.context;
  ctx.vehicle = setup.sim.vehicle;
  ctx.planet = setup.sim.planet;
  ctx.truth = out.truth;
  auto estimator = estimators::make_estimator(setup.estimator, ctx);

  sim::SimSetup s = setup.sim;
  std::mt19937_64 noise_rng(derive_seed(seed, kNoiseStream));
  if (setup.noise) {
    const auto spec = *setup.noise;
    const double g0 = s.planet.g0();
    s.corrupt = [spec, g0, &noise_rng](Measurement& m) { evalmc::corrupt_measurement(m, spec, g0, noise_rng); };
  }
  out.result = sim::simulate(s, *out.truth, *estimator);
  return out;
}

Dataset generate_dataset(const CaseSetup& setup, std::size_t count, std::uint64_t master_seed, int jobs) {
  std::vector<CaseOutcome> outcomes(count);
  parallel_for(count, jobs, [&](std::size_t i) {
    outcomes[i] = run_case(setup, case_seed(master_seed, i));
    outcomes[i].result.cycles.clear();
    outcomes[i].result.cycles.shrink_to_fit();
  });
  Dataset d;
  for (auto& o : outcomes) {
    const auto& r = o.result;
    std::string reason;
    if (!r.ok) {
      reason = r.failure;
    } else if (!r.altitude_monotone) {
      reason = "altitude not monotone";
    } else if (r.features.empty()) {
      reason = "guidance never activated";
    }
    if (!reason.empty()) {
      ++d.failures;
      d.failure_reasons.push_back("case " + std::to_string(o.case_seed) + ": " + reason);
      continue;
    }
    TrajectorySample s;
    s.case_seed = o.case_seed;
    s.atmosphere = o.atmosphere;
    s.times = r.feature_times;
    s.features = r.features;
    s.target = interpolate_targets(*o.truth, r.final_altitude_km);
    s.range_to_go = r.range_to_go;
    s.final_altitude_km = r.final_altitude_km;
    d.samples.push_back(std::move(s));
  }
  return d;
}

std::vector<double> normalized_inputs(const TrajectorySample& s, const NormalizationStats& stats) {
  std::vector<double> xs;
  xs.reserve(s.features.size() * kFeatureCount);
  for (const auto& f : s.features) {
    const auto n = normalize_features(f, stats);
    xs.insert(xs.end(), n.begin(), n.end());
  }
  return xs;
}

std::vector<double> normalized_target(const TrajectorySample& s, const NormalizationStats& stats) {
  const auto y = normalize_targets(s.target.eta, stats);
  return {y.begin(), y.end()};
}

}  // namespace entrylab::pipeline
