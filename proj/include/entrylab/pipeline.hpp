#pragma once

// Training-data construction: closed-loop runs over dispersed atmospheres,
// feature sequences, pseudodensity targets and normalization statistics.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "entrylab/atmos.hpp"
#include "entrylab/estimators.hpp"
#include "entrylab/features.hpp"
#include "entrylab/lstm.hpp"
#include "entrylab/noise.hpp"
#include "entrylab/simulation.hpp"

namespace entrylab::pipeline {

struct TrajectorySample {
  std::uint64_t case_seed = 0;
  atmos::AtmoSample atmosphere;
  std::vector<double> times;
  std::vector<FeatureVector> features;
  atmos::PseudodensityProfile target;
  double range_to_go = 0.0;  // signed, rad
  double final_altitude_km = 0.0;
};

/// Features of every cycle in which the estimator was fed, recomputed from the
/// logged truth state and command. Throws IngestError when none were logged.
std::vector<FeatureVector> extract_features(const std::vector<sim::CycleLog>& cycles,
                                            const atmos::AtmosphereProfile& truth,
                                            const dynamics::PlanetModel& planet);

/// Pseudodensity of the truth profile on the prediction grid. Nodes below the
/// terminal altitude are extrapolated linearly in (h, eta) from the two lowest
/// nodes at or above it.
atmos::PseudodensityProfile interpolate_targets(const atmos::AtmosphereProfile& truth,
                                                double final_altitude_km);

using NormalizationStats = neural::Normalization;

inline constexpr double kStdGuard = 1e-12;

/// Feature statistics average each sample's time mean (1/K sum 1/N_k sum);
/// target statistics average over samples. Standard deviations below the
/// guard are replaced by it.
NormalizationStats compute_norm_stats(const std::vector<TrajectorySample>& samples);

FeatureVector normalize_features(const FeatureVector& x, const NormalizationStats& s);
FeatureVector denormalize_features(const FeatureVector& x, const NormalizationStats& s);
atmos::NodeValues normalize_targets(const atmos::NodeValues& eta, const NormalizationStats& s);
atmos::NodeValues denormalize_targets(const atmos::NodeValues& y, const NormalizationStats& s);

/// Everything needed to run one closed-loop case.
struct CaseSetup {
  sim::SimSetup sim;
  estimators::Kind estimator = estimators::Kind::exponential;
  estimators::EstimatorContext context;
  atmos::GasModel gas;
  atmos::SurrogateConfig surrogate;
  std::optional<evalmc::NoiseSpec> noise;
};

struct CaseOutcome {
  std::uint64_t case_seed = 0;
  atmos::AtmoSample atmosphere;
  std::shared_ptr<const atmos::AtmosphereProfile> truth;
  sim::SimResult result;
};

/// Draws the atmosphere from the case seed, builds the estimator and runs the
/// trajectory. Noise (if any) uses a stream independent of the atmosphere.
CaseOutcome run_case(const CaseSetup& setup, std::uint64_t case_seed);

/// Seed of case i under a master seed.
std::uint64_t case_seed(std::uint64_t master, std::size_t index);

struct Dataset {
  std::vector<TrajectorySample> samples;
  std::size_t failures = 0;
  std::vector<std::string> failure_reasons;  // "case <seed>: <reason>"
};

/// Runs `count` cases from `master_seed`; failed trajectories and those whose
/// altitude is not monotone are excluded and counted.
Dataset generate_dataset(const CaseSetup& setup, std::size_t count, std::uint64_t master_seed, int jobs);

/// Turns a sample into model-ready tensors: N x 10 normalized inputs and the
/// normalized 39-node target.
std::vector<double> normalized_inputs(const TrajectorySample& s, const NormalizationStats& stats);
std::vector<double> normalized_target(const TrajectorySample& s, const NormalizationStats& stats);

}  // namespace entrylab::pipeline
