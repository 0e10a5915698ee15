#pragma once

// Run configuration: one JSON file with mission, vehicle, planet, guidance,
// atmosphere, training, campaign and seeds blocks. Every key is optional and
// falls back to the reference mission; unknown keys are rejected. Angles are
// in degrees on disk.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "entrylab/curriculum.hpp"
#include "entrylab/estimators.hpp"
#include "entrylab/mission.hpp"
#include "entrylab/noise.hpp"
#include "entrylab/pipeline.hpp"

namespace entrylab::config {

enum class Scale { desk, paper };

Scale parse_scale(std::string_view name);
std::string_view scale_name(Scale s);

struct SeedManifest {
  std::uint64_t data = 101;      // initial training trajectories
  std::uint64_t train = 202;     // shuffling and dropout
  std::uint64_t init = 303;      // weight initialization
  std::uint64_t evaluation = 404;// curriculum statistics campaign
  std::uint64_t test = 505;      // held-out density test set
  std::uint64_t campaign = 606;  // estimator comparison campaigns

  /// All seeds derived from one master.
  static SeedManifest from_master(std::uint64_t master);
};

struct RunConfig {
  Scale scale = Scale::paper;
  Mission mission;
  dynamics::VehicleParams vehicle;
  dynamics::PlanetModel planet;
  fnpeg::GuidanceConfig guidance;
  double sim_dt = 0.1;
  double max_time = 3000.0;

  atmos::GasModel gas;
  atmos::SurrogateConfig surrogate;
  atmos::ExponentialModel exponential;  // onboard model
  double filter_beta = 0.9;

  pipeline::TrainSetup training;
  std::size_t dataset_count = 5000;
  pipeline::CurriculumConfig curriculum;
  std::size_t curriculum_eval_count = 5000;

  std::size_t campaign_count = 5000;
  std::vector<estimators::Kind> campaign_estimators{estimators::Kind::exponential, estimators::Kind::filter,
                                                    estimators::Kind::lstm};
  bool noise = false;
  evalmc::NoiseSpec noise_levels;
  std::size_t test_count = 1000;

  SeedManifest seeds;
};

/// Reference setup at the given scale.
RunConfig defaults(Scale scale);

/// Overlays a JSON document onto the defaults of its scale. A top-level
/// "scale" key selects the base, `scale_override` wins over it. Throws
/// ConfigError on unknown keys, wrong types or invalid values.
RunConfig from_json(const nlohmann::json& j, std::optional<Scale> scale_override = std::nullopt);

/// "default" gives the paper-scale reference setup (or the override scale).
RunConfig load(const std::string& path_or_default, std::optional<Scale> scale_override = std::nullopt);

nlohmann::ordered_json to_json(const RunConfig& c);

/// FNV-1a of the canonical JSON dump.
std::string hash(const RunConfig& c);

void validate(const RunConfig& c);

pipeline::CaseSetup case_setup(const RunConfig& c, estimators::Kind kind, bool noise);

}  // namespace entrylab::config
