#include "entrylab/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>

#include "entrylab/errors.hpp"
#include "entrylab/parallel.hpp"
#include "entrylab/seeds.hpp"

namespace entrylab::neural {

namespace {
constexpr std::size_t kChunk = 4;

void check_set(const LstmModel& model, const SequenceSet& set) {
  const auto& a = model.arch();
  if (set.inputs.size() != set.targets.size()) throw DomainError("sequence set: inputs/targets count mismatch");
  for (std::size_t k = 0; k < set.size(); ++k) {
    if (set.inputs[k].empty() || set.inputs[k].size() % a.inputs != 0) {
      throw DomainError("sequence set: sample " + std::to_string(k) + " has a bad input shape");
    }
    if (set.targets[k].size() != a.outputs) {
      throw DomainError("sequence set: sample " + std::to_string(k) + " has a bad target width");
    }
  }
}
}  // namespace

void validate(const TrainConfig& c) {
  if (c.epochs == 0 || c.batch_size == 0) throw ConfigError("epochs and batch size must be positive");
  if (!(c.adam.learning_rate > 0.0) || !(c.adam.decay >= 0.0) || !(c.adam.clip > 0.0)) {
    throw ConfigError("learning rate and clip must be positive, decay non-negative");
  }
}

double evaluate_loss(const LstmModel& model, const SequenceSet& set) {
  if (set.size() == 0) return std::nan("");
  double total = 0.0;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const auto y = forward_sequence(model, set.inputs[k]);
    total += sequence_loss(y, set.targets[k], set.inputs[k].size() / model.arch().inputs);
  }
  return total / static_cast<double>(set.size());
}

double batch_gradient(const LstmModel& model, const SequenceSet& set, const std::vector<std::size_t>& batch,
                      const std::vector<std::uint64_t>& mask_seeds, std::vector<double>& grad, int jobs) {
  const auto& a = model.arch();
  const std::size_t B = batch.size();
  const std::size_t chunks = (B + kChunk - 1) / kChunk;
  std::vector<std::vector<double>> chunk_grad(chunks);
  std::vector<double> chunk_loss(chunks, 0.0);
  const double weight = 1.0 / static_cast<double>(B);
  parallel_for(chunks, jobs, [&](std::size_t c) {
    auto& g = chunk_grad[c];
    g.assign(model.param_count(), 0.0);
    Trace trace;
    BackwardWorkspace ws;
    std::vector<double> dout;
    for (std::size_t s = c * kChunk; s < std::min(B, (c + 1) * kChunk); ++s) {
      const auto& x = set.inputs[batch[s]];
      const std::size_t steps = x.size() / a.inputs;
      std::mt19937_64 rng(mask_seeds[s]);
      const DropoutMasks masks = sample_masks(a, steps, rng);
      forward_trace(model, x, &masks, trace);
      dout.resize(trace.output.size());
      chunk_loss[c] += sequence_loss(trace.output, set.targets[batch[s]], steps, dout, weight);
      backward_trace(model, trace, &masks, dout, g, ws);
    }
  });
  grad.assign(model.param_count(), 0.0);
  double loss = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += chunk_grad[c][j];
    loss += chunk_loss[c];
  }
  return loss * weight;
}

TrainHistory train(LstmModel& model, const SequenceSet& train_set, const SequenceSet& val_set,
                   const TrainConfig& config) {
  validate(config);
  check_set(model, train_set);
  check_set(model, val_set);
  if (train_set.size() == 0) throw DomainError("training set is empty");
  Adam adam(model.param_count(), config.adam);
  TrainHistory history;
  std::vector<std::size_t> order(train_set.size());
  std::vector<double> grad;
  std::vector<double> last_good(model.params().begin(), model.params().end());
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, kShuffleStream, epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size, ++batches) {
      const std::vector<std::size_t> batch(order.begin() + static_cast<std::ptrdiff_t>(start),
                                           order.begin() + static_cast<std::ptrdiff_t>(
                                                               std::min(order.size(), start + config.batch_size)));
      std::vector<std::uint64_t> seeds(batch.size());
      for (std::size_t s = 0; s < batch.size(); ++s) {
        seeds[s] = derive_seed(derive_seed(config.seed, kDropoutStream, epoch), batches, s);
      }
      const double loss = batch_gradient(model, train_set, batch, seeds, grad, config.jobs);
      if (!std::isfinite(loss)) {
        std::copy(last_good.begin(), last_good.end(), model.params().begin());
        throw TrainingDiverged("non-finite training loss in epoch " + std::to_string(epoch + 1), history);
      }
      std::copy(model.params().begin(), model.params().end(), last_good.begin());
      adam.step(model.params(), grad, model.tensors());
      epoch_loss += loss;
    }
    const double val = val_set.size() ? evaluate_loss(model, val_set) : std::nan("");
    history.epochs.push_back({epoch + 1, epoch_loss / static_cast<double>(batches), val});
  }
  return history;
}

void write_loss_csv(const std::filesystem::path& path, const TrainHistory& h) {
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17) << "epoch,train_loss,val_loss\n";
  for (const auto& e : h.epochs) f << e.epoch << ',' << e.train_loss << ',' << e.val_loss << '\n';
}

}  // namespace entrylab::neural
