#pragma once

// Minibatch training of the sequence model with Adam and per-tensor clipping.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "entrylab/lstm.hpp"

namespace entrylab::neural {

/// Normalized sequences: inputs[k] is N_k x d, targets[k] the m-vector every
/// step of sample k regresses to.
struct SequenceSet {
  std::vector<std::vector<double>> inputs;
  std::vector<std::vector<double>> targets;
  std::size_t size() const { return inputs.size(); }
};

struct TrainConfig {
  AdamConfig adam;
  std::size_t epochs = 50;
  std::size_t batch_size = 16;
  std::uint64_t seed = 1;
  int jobs = 1;
};

void validate(const TrainConfig& config);

struct EpochStats {
  std::size_t epoch;    // 1-based
  double train_loss;    // mean minibatch loss over the epoch (dropout active)
  double val_loss;      // full validation set, inference mode
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

/// Thrown on a non-finite loss; the model is restored to the last finite
/// parameters before the exception propagates.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, TrainHistory history)
      : std::runtime_error(what), history(std::move(history)) {}
  TrainHistory history;
};

/// Loss over a set in inference mode (no dropout).
double evaluate_loss(const LstmModel& model, const SequenceSet& set);

/// Loss and gradient of one minibatch: (1/B) sum_k per-sample loss. Samples are
/// processed in fixed chunks whose partial gradients are summed in chunk order,
/// so the result does not depend on the number of workers. Dropout masks come
/// from per-sample seeds.
double batch_gradient(const LstmModel& model, const SequenceSet& set, const std::vector<std::size_t>& batch,
                      const std::vector<std::uint64_t>& mask_seeds, std::vector<double>& grad, int jobs);

/// Trains in place. Each epoch shuffles the training set with a seeded RNG.
TrainHistory train(LstmModel& model, const SequenceSet& train_set, const SequenceSet& val_set,
                   const TrainConfig& config);

void write_loss_csv(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace entrylab::neural
