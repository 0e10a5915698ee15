#pragma once

// Stacked LSTM sequence-to-sequence regressor with inverted dropout between
// layers and a dense read-out, plus exact backpropagation through time.
//
// Gate equations per layer (x the layer input, h/c the previous states):
//   f = sig(W_f x + U_f h + b_f)     i = sig(W_i x + U_i h + b_i)
//   o = sig(W_o x + U_o h + b_o)     g = tanh(W_c x + U_c h + b_c)
//   c' = f*c + i*g                   h' = o * act(c')
// with act = sigmoid by default (tanh selectable). The four gate blocks are
// stacked row-wise in the order f, i, o, c so one GEMV serves all gates.
//
// All parameters live in one flat vector; tensors are views into it. The
// optimizer, clipping and serialization operate on the tensor list.

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entrylab/kernels.hpp"

namespace entrylab::neural {

enum class HiddenActivation { sigmoid, tanh };

HiddenActivation parse_activation(std::string_view name);
std::string_view activation_name(HiddenActivation a);

struct Architecture {
  std::size_t inputs = 10;
  std::size_t hidden = 32;
  std::size_t outputs = 39;
  std::size_t layers = 2;
  double dropout = 0.2;  // drop probability after each LSTM layer
  HiddenActivation activation = HiddenActivation::sigmoid;
};

void validate(const Architecture& arch);

/// Location of one parameter tensor inside the flat vector.
struct TensorSpec {
  std::string name;
  std::size_t offset;
  std::size_t rows;
  std::size_t cols;
  std::size_t size() const { return rows * cols; }
};

/// z-score statistics for the 10 features and the output nodes.
struct Normalization {
  std::vector<double> feature_mean, feature_std;
  std::vector<double> target_mean, target_std;

  bool empty() const { return feature_mean.empty(); }
};

class LstmModel {
 public:
  LstmModel() = default;
  explicit LstmModel(const Architecture& arch);

  const Architecture& arch() const { return arch_; }
  const std::vector<TensorSpec>& tensors() const { return tensors_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  std::size_t param_count() const { return params_.size(); }

  /// Input width of layer l.
  std::size_t layer_inputs(std::size_t l) const { return l == 0 ? arch_.inputs : arch_.hidden; }

  // Tensor views. W: 4h x d, U: 4h x h, b: 4h, dense W: m x h, dense b: m.
  kernels::ConstMatrixView W(std::size_t l) const { return view(3 * l); }
  kernels::ConstMatrixView U(std::size_t l) const { return view(3 * l + 1); }
  const double* b(std::size_t l) const { return params_.data() + tensors_[3 * l + 2].offset; }
  kernels::ConstMatrixView dense_W() const { return view(3 * arch_.layers); }
  const double* dense_b() const { return params_.data() + tensors_[3 * arch_.layers + 1].offset; }

  /// Uniform(-1/sqrt(h), 1/sqrt(h)) weights, zero biases.
  void initialize(std::uint64_t seed);

  Normalization norm;
  std::uint64_t seed = 0;

 private:
  kernels::ConstMatrixView view(std::size_t t) const {
    const auto& s = tensors_[t];
    return {params_.data() + s.offset, s.rows, s.cols};
  }

  Architecture arch_;
  std::vector<TensorSpec> tensors_;
  std::vector<double> params_;
};

double sigmoid(double x);

// ---------------------------------------------------------------------------
// Inference

/// Recurrent state for step-by-step inference (dropout inactive).
class InferenceState {
 public:
  explicit InferenceState(const LstmModel& model);
  void reset();
  /// Advance one time step with an already-normalized input; writes m outputs.
  void step(std::span<const double> x, std::span<double> y);

 private:
  const LstmModel* model_;
  std::vector<std::vector<double>> h_, c_;
  std::vector<double> z_, x_next_;
};

/// Sequence forward in inference mode. xs is N x d row-major; returns N x m.
std::vector<double> forward_sequence(const LstmModel& model, std::span<const double> xs);

// ---------------------------------------------------------------------------
// Training passes

/// Dropout multipliers (0 or 1/(1-p)) per layer, N x h each.
struct DropoutMasks {
  std::vector<std::vector<double>> layer;
};

DropoutMasks sample_masks(const Architecture& arch, std::size_t steps, std::mt19937_64& rng);

/// Cached activations of one forward pass.
struct Trace {
  std::size_t steps = 0;
  std::vector<std::vector<double>> input;  // per layer, N x d_l (layer 0 = features)
  std::vector<std::vector<double>> gates;  // per layer, N x 4h post-activation (f, i, o, g)
  std::vector<std::vector<double>> cell;   // per layer, N x h
  std::vector<std::vector<double>> act;    // per layer, N x h, act(c)
  std::vector<std::vector<double>> hidden; // per layer, N x h, unmasked h
  std::vector<double> top;                 // N x h, masked output of the last layer
  std::vector<double> output;              // N x m
};

/// masks == nullptr runs in inference mode.
void forward_trace(const LstmModel& model, std::span<const double> xs, const DropoutMasks* masks,
                   Trace& trace);

/// Scratch buffers reused across backward passes.
struct BackwardWorkspace {
  std::vector<double> dtop, dlayer, dh, dc, dz, dh_next, dc_next;
};

/// Accumulates dLoss/dparams into grad (same layout as model.params()) given
/// dLoss/doutput (N x m). Masks must be those used in the forward pass.
void backward_trace(const LstmModel& model, const Trace& trace, const DropoutMasks* masks,
                    std::span<const double> doutput, std::span<double> grad,
                    BackwardWorkspace& ws);

// ---------------------------------------------------------------------------
// Loss, clipping, optimizer

/// (1/N) sum_t ||y_t - target||^2 for one sample whose target is the same
/// m-vector at every step. When dout is non-empty it receives
/// weight * d/dy of that quantity.
double sequence_loss(std::span<const double> y, std::span<const double> target, std::size_t steps,
                     std::span<double> dout = {}, double weight = 1.0);

/// (1/K) sum_k (1/N_k) sum_t ||y - t||^2 for explicit per-step targets, each
/// sample stored as N_k x width. Throws DomainError on a shape mismatch.
double batch_loss(const std::vector<std::vector<double>>& predictions,
                  const std::vector<std::vector<double>>& targets, std::size_t width);

/// Rescale each tensor slice whose L2 norm exceeds cap to norm cap.
void clip_per_tensor(const std::vector<TensorSpec>& tensors, std::span<double> grad, double cap);

struct AdamConfig {
  double learning_rate = 1e-3;
  double decay = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double clip = 1.0;
};

class Adam {
 public:
  Adam(std::size_t n, const AdamConfig& config);

  /// lambda_k = lambda_0 / (1 + alpha k), k counted from 0.
  double rate(std::uint64_t k) const;

  /// Clips grad in place, then applies one update with step index k.
  void step(std::span<double> params, std::span<double> grad, const std::vector<TensorSpec>& tensors);

  std::uint64_t steps() const { return k_; }

 private:
  AdamConfig config_;
  std::vector<double> m_, v_;
  std::uint64_t k_ = 0;
};

}  // namespace entrylab::neural
