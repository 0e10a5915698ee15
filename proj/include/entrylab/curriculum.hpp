#pragma once

// Model training from a dataset, and the outer loop that retrains on data
// regenerated with the network in the guidance loop until the terminal
// accuracy statistics settle.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <vector>

#include "entrylab/lstm.hpp"
#include "entrylab/pipeline.hpp"
#include "entrylab/train.hpp"

namespace entrylab::pipeline {

struct TrainSetup {
  neural::Architecture arch;
  neural::TrainConfig train;
  double validation_fraction = 0.2;  // trailing share of the dataset
  std::uint64_t init_seed = 1;
};

neural::SequenceSet to_sequences(const std::vector<TrajectorySample>& samples, const NormalizationStats& stats);

struct TrainedModel {
  neural::LstmModel model;
  neural::TrainHistory history;
};

/// Splits the dataset, computes statistics on the training part and trains.
/// A warm model with the same architecture supplies the initial weights.
TrainedModel train_on_dataset(const Dataset& data, const TrainSetup& setup, const neural::LstmModel* warm = nullptr);

struct CurriculumConfig {
  std::size_t max_iterations = 15;
  double tolerance = 0.03;           // relative change of mu and sigma
  std::size_t divergence_streak = 3; // consecutive mu increases that abort
  bool warm_start = true;
};

struct IterationRecord {
  std::size_t iteration = 0;  // 1-based
  double mu_km = 0.0;
  double sigma_km = 0.0;
  bool converged = false;
  neural::TrainHistory history;
  std::vector<double> signed_km;
};

struct CurriculumResult {
  std::shared_ptr<const neural::LstmModel> model;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool diverged = false;
};

/// Pluggable stages, so the loop can run against cheap stand-ins.
struct CurriculumHooks {
  std::function<TrainedModel(const Dataset&, const neural::LstmModel* warm, std::size_t iteration)> train;
  /// Signed terminal range-to-go (km) of the successful evaluation cases.
  std::function<std::vector<double>(const neural::LstmModel&, std::size_t iteration)> evaluate;
  std::function<Dataset(const neural::LstmModel&, std::size_t iteration)> regenerate;
  /// Optional, called after each iteration's statistics are known.
  std::function<void(const IterationRecord&, const neural::LstmModel&)> on_iteration;
};

/// Mean and population standard deviation of |x|.
std::pair<double, double> magnitude_stats(const std::vector<double>& signed_values);

/// |cur - prev| / prev; zero when both vanish and infinite when only prev does.
double relative_change(double prev, double cur);

CurriculumResult run_curriculum(Dataset initial, const CurriculumConfig& config, const CurriculumHooks& hooks);

/// Hooks that train with `train`, evaluate with a campaign of `eval_count`
/// cases from `eval_seed`, and regenerate `data_count` trajectories per
/// iteration from seeds derived from `data_seed`.
struct CurriculumSetup {
  CaseSetup base;
  TrainSetup train;
  std::size_t data_count = 250;
  std::size_t eval_count = 200;
  std::uint64_t data_seed = 1;
  std::uint64_t eval_seed = 2;
  int jobs = 1;
};

CurriculumHooks default_hooks(const CurriculumSetup& setup);

void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& iterations);

}  // namespace entrylab::pipeline
