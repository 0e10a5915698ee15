#include "entrylab/lstm.hpp"

#include <algorithm>
#include <cmath>

#include "entrylab/errors.hpp"

namespace entrylab::neural {

using kernels::ConstMatrixView;
using kernels::MatrixView;

HiddenActivation parse_activation(std::string_view name) {
  if (name == "sigmoid") return HiddenActivation::sigmoid;
  if (name == "tanh") return HiddenActivation::tanh;
  throw ConfigError("hidden_activation must be sigmoid or tanh, got '" + std::string(name) + "'");
}

std::string_view activation_name(HiddenActivation a) {
  return a == HiddenActivation::sigmoid ? "sigmoid" : "tanh";
}

void validate(const Architecture& a) {
  if (a.inputs == 0 || a.hidden == 0 || a.outputs == 0 || a.layers == 0) {
    throw ConfigError("LSTM dimensions must be positive");
  }
  if (!(a.dropout >= 0.0 && a.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

LstmModel::LstmModel(const Architecture& arch) : arch_(arch) {
  validate(arch_);
  std::size_t offset = 0;
  auto add = [&](std::string name, std::size_t rows, std::size_t cols) {
    tensors_.push_back({std::move(name), offset, rows, cols});
    offset += rows * cols;
  };
  const std::size_t h = arch_.hidden;
  for (std::size_t l = 0; l < arch_.layers; ++l) {
    const std::string p = "lstm" + std::to_string(l + 1) + ".";
    add(p + "W", 4 * h, layer_inputs(l));
    add(p + "U", 4 * h, h);
    add(p + "b", 4 * h, 1);
  }
  add("dense.W", arch_.outputs, h);
  add("dense.b", arch_.outputs, 1);
  params_.assign(offset, 0.0);
}

void LstmModel::initialize(std::uint64_t s) {
  seed = s;
  std::mt19937_64 rng(s);
  const double a = 1.0 / std::sqrt(static_cast<double>(arch_.hidden));
  std::uniform_real_distribution<double> u(-a, a);
  for (const auto& t : tensors_) {
    const bool bias = t.cols == 1;
    for (std::size_t k = 0; k < t.size(); ++k) params_[t.offset + k] = bias ? 0.0 : u(rng);
  }
}

namespace {

inline double activate(HiddenActivation a, double c) {
  return a == HiddenActivation::sigmoid ? sigmoid(c) : std::tanh(c);
}

inline double activate_prime(HiddenActivation a, double s) {
  return a == HiddenActivation::sigmoid ? s * (1.0 - s) : 1.0 - s * s;
}

// One cell update. z holds the 4h pre-activations on entry and the gate
// values (f, i, o, g) on exit; c is updated in place; s receives act(c) and
// h receives o * act(c).
void cell_update(HiddenActivation act, std::size_t n, double* z, double* c, double* s, double* h) {
  double* f = z;
  double* i = z + n;
  double* o = z + 2 * n;
  double* g = z + 3 * n;
  for (std::size_t k = 0; k < n; ++k) {
    f[k] = sigmoid(f[k]);
    i[k] = sigmoid(i[k]);
    o[k] = sigmoid(o[k]);
    g[k] = std::tanh(g[k]);
    c[k] = f[k] * c[k] + i[k] * g[k];
    s[k] = activate(act, c[k]);
    h[k] = o[k] * s[k];
  }
}

void check_finite(std::span<const double> xs) {
  for (double v : xs) {
    if (!std::isfinite(v)) throw NumericError("non-finite LSTM input");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

InferenceState::InferenceState(const LstmModel& model) : model_(&model) { reset(); }

void InferenceState::reset() {
  const auto& a = model_->arch();
  h_.assign(a.layers, std::vector<double>(a.hidden, 0.0));
  c_.assign(a.layers, std::vector<double>(a.hidden, 0.0));
  z_.assign(4 * a.hidden, 0.0);
  x_next_.assign(a.hidden, 0.0);
}

void InferenceState::step(std::span<const double> x, std::span<double> y) {
  const auto& a = model_->arch();
  if (x.size() != a.inputs || y.size() != a.outputs) throw DomainError("InferenceState::step: size mismatch");
  check_finite(x);
  const auto& k = kernels::active();
  const std::size_t n = a.hidden;
  std::vector<double> s(n);
  const double* in = x.data();
  for (std::size_t l = 0; l < a.layers; ++l) {
    std::copy_n(model_->b(l), 4 * n, z_.begin());
    k.gemv(model_->W(l), in, z_.data());
    k.gemv(model_->U(l), h_[l].data(), z_.data());
    cell_update(a.activation, n, z_.data(), c_[l].data(), s.data(), h_[l].data());
    in = h_[l].data();
  }
  std::copy_n(model_->dense_b(), a.outputs, y.begin());
  k.gemv(model_->dense_W(), in, y.data());
}

std::vector<double> forward_sequence(const LstmModel& model, std::span<const double> xs) {
  const auto& a = model.arch();
  if (xs.empty() || xs.size() % a.inputs != 0) throw DomainError("forward_sequence: bad input shape");
  const std::size_t steps = xs.size() / a.inputs;
  std::vector<double> out(steps * a.outputs);
  InferenceState state(model);
  for (std::size_t t = 0; t < steps; ++t) {
    state.step(xs.subspan(t * a.inputs, a.inputs),
               std::span<double>(out).subspan(t * a.outputs, a.outputs));
  }
  return out;
}

// ---------------------------------------------------------------------------

DropoutMasks sample_masks(const Architecture& arch, std::size_t steps, std::mt19937_64& rng) {
  DropoutMasks m;
  m.layer.resize(arch.layers);
  const double keep = 1.0 - arch.dropout;
  std::bernoulli_distribution draw(keep);
  for (auto& layer : m.layer) {
    layer.resize(steps * arch.hidden);
    if (arch.dropout == 0.0) {
      std::fill(layer.begin(), layer.end(), 1.0);
      continue;
    }
    for (double& v : layer) v = draw(rng) ? 1.0 / keep : 0.0;
  }
  return m;
}

void forward_trace(const LstmModel& model, std::span<const double> xs, const DropoutMasks* masks,
                   Trace& tr) {
  const auto& a = model.arch();
  if (xs.empty() || xs.size() % a.inputs != 0) throw DomainError("forward_trace: bad input shape");
  check_finite(xs);
  const std::size_t N = xs.size() / a.inputs;
  const std::size_t n = a.hidden;
  if (masks && (masks->layer.size() != a.layers || masks->layer[0].size() != N * n)) {
    throw DomainError("forward_trace: dropout masks do not match the sequence");
  }
  const auto& k = kernels::active();
  tr.steps = N;
  tr.input.resize(a.layers);
  tr.gates.resize(a.layers);
  tr.cell.resize(a.layers);
  tr.act.resize(a.layers);
  tr.hidden.resize(a.layers);
  tr.input[0].assign(xs.begin(), xs.end());
  tr.top.resize(N * n);
  tr.output.resize(N * a.outputs);

  std::vector<double> c(n);
  for (std::size_t l = 0; l < a.layers; ++l) {
    const std::size_t d = model.layer_inputs(l);
    tr.gates[l].resize(N * 4 * n);
    tr.cell[l].resize(N * n);
    tr.act[l].resize(N * n);
    tr.hidden[l].resize(N * n);
    std::vector<double>& next = l + 1 < a.layers ? tr.input[l + 1] : tr.top;
    next.resize(N * n);
    std::fill(c.begin(), c.end(), 0.0);
    for (std::size_t t = 0; t < N; ++t) {
      double* z = tr.gates[l].data() + t * 4 * n;
      std::copy_n(model.b(l), 4 * n, z);
      k.gemv(model.W(l), tr.input[l].data() + t * d, z);
      if (t > 0) k.gemv(model.U(l), tr.hidden[l].data() + (t - 1) * n, z);
      double* h = tr.hidden[l].data() + t * n;
      cell_update(a.activation, n, z, c.data(), tr.act[l].data() + t * n, h);
      std::copy(c.begin(), c.end(), tr.cell[l].begin() + static_cast<std::ptrdiff_t>(t * n));
      double* out = next.data() + t * n;
      if (masks) {
        const double* m = masks->layer[l].data() + t * n;
        for (std::size_t j = 0; j < n; ++j) out[j] = h[j] * m[j];
      } else {
        std::copy_n(h, n, out);
      }
    }
  }
  for (std::size_t t = 0; t < N; ++t) {
    double* y = tr.output.data() + t * a.outputs;
    std::copy_n(model.dense_b(), a.outputs, y);
    k.gemv(model.dense_W(), tr.top.data() + t * n, y);
  }
}

void backward_trace(const LstmModel& model, const Trace& tr, const DropoutMasks* masks,
                    std::span<const double> dout, std::span<double> grad, BackwardWorkspace& ws) {
  const auto& a = model.arch();
  const std::size_t N = tr.steps;
  const std::size_t n = a.hidden;
  const std::size_t m = a.outputs;
  if (dout.size() != N * m) throw DomainError("backward_trace: output gradient shape mismatch");
  if (grad.size() != model.param_count()) throw DomainError("backward_trace: gradient size mismatch");
  const auto& k = kernels::active();
  const auto& T = model.tensors();
  auto gview = [&](std::size_t t) {
    return MatrixView{grad.data() + T[t].offset, T[t].rows, T[t].cols};
  };

  // Dense read-out.
  ws.dtop.assign(N * n, 0.0);
  {
    const MatrixView dW = gview(3 * a.layers);
    double* db = grad.data() + T[3 * a.layers + 1].offset;
    for (std::size_t t = 0; t < N; ++t) {
      const double* dy = dout.data() + t * m;
      k.ger(dW, 1.0, dy, tr.top.data() + t * n);
      k.axpy(1.0, dy, db, m);
      k.gemv_t(model.dense_W(), dy, ws.dtop.data() + t * n);
    }
  }

  ws.dh.resize(n);
  ws.dc.resize(n);
  ws.dz.resize(4 * n);
  ws.dh_next.resize(n);
  ws.dc_next.resize(n);
  // ws.dtop holds dL/d(masked output) of the current layer on entry to each
  // iteration; the lower layer's version is built in ws.dlayer and swapped.
  for (std::size_t li = a.layers; li-- > 0;) {
    const std::size_t d = model.layer_inputs(li);
    const MatrixView dW = gview(3 * li);
    const MatrixView dU = gview(3 * li + 1);
    double* db = grad.data() + T[3 * li + 2].offset;
    const bool need_dx = li > 0;
    if (need_dx) ws.dlayer.assign(N * d, 0.0);
    std::fill(ws.dh_next.begin(), ws.dh_next.end(), 0.0);
    std::fill(ws.dc_next.begin(), ws.dc_next.end(), 0.0);
    const double* mask = masks ? masks->layer[li].data() : nullptr;
    for (std::size_t t = N; t-- > 0;) {
      const double* gates = tr.gates[li].data() + t * 4 * n;
      const double* f = gates;
      const double* i = gates + n;
      const double* o = gates + 2 * n;
      const double* g = gates + 3 * n;
      const double* s = tr.act[li].data() + t * n;
      const double* c_prev = t > 0 ? tr.cell[li].data() + (t - 1) * n : nullptr;
      const double* up = ws.dtop.data() + t * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double dh = (mask ? up[j] * mask[t * n + j] : up[j]) + ws.dh_next[j];
        const double dc = ws.dc_next[j] + dh * o[j] * activate_prime(a.activation, s[j]);
        const double cp = c_prev ? c_prev[j] : 0.0;
        ws.dz[j] = dc * cp * f[j] * (1.0 - f[j]);
        ws.dz[n + j] = dc * g[j] * i[j] * (1.0 - i[j]);
        ws.dz[2 * n + j] = dh * s[j] * o[j] * (1.0 - o[j]);
        ws.dz[3 * n + j] = dc * i[j] * (1.0 - g[j] * g[j]);
        ws.dc_next[j] = dc * f[j];
      }
      k.ger(dW, 1.0, ws.dz.data(), tr.input[li].data() + t * d);
      k.axpy(1.0, ws.dz.data(), db, 4 * n);
      std::fill(ws.dh_next.begin(), ws.dh_next.end(), 0.0);
      if (t > 0) {
        k.ger(dU, 1.0, ws.dz.data(), tr.hidden[li].data() + (t - 1) * n);
        k.gemv_t(model.U(li), ws.dz.data(), ws.dh_next.data());
      }
      if (need_dx) k.gemv_t(model.W(li), ws.dz.data(), ws.dlayer.data() + t * d);
    }
    if (need_dx) std::swap(ws.dtop, ws.dlayer);
  }
}

// ---------------------------------------------------------------------------

double sequence_loss(std::span<const double> y, std::span<const double> target, std::size_t steps,
                     std::span<double> dout, double weight) {
  const std::size_t m = target.size();
  if (steps == 0 || y.size() != steps * m) throw DomainError("sequence_loss: shape mismatch");
  if (!dout.empty() && dout.size() != y.size()) throw DomainError("sequence_loss: gradient shape mismatch");
  const double inv_n = 1.0 / static_cast<double>(steps);
  double total = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < m; ++j) {
      const double e = y[t * m + j] - target[j];
      total += e * e;
      if (!dout.empty()) dout[t * m + j] = weight * 2.0 * inv_n * e;
    }
  }
  return total * inv_n;
}

double batch_loss(const std::vector<std::vector<double>>& pred, const std::vector<std::vector<double>>& tgt,
                  std::size_t width) {
  if (pred.empty() || pred.size() != tgt.size() || width == 0) throw DomainError("batch_loss: shape mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const auto& p = pred[k];
    const auto& t = tgt[k];
    if (p.size() != t.size() || p.empty() || p.size() % width != 0) {
      throw DomainError("batch_loss: shape mismatch");
    }
    double s = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) s += (p[j] - t[j]) * (p[j] - t[j]);
    total += s / static_cast<double>(p.size() / width);
  }
  return total / static_cast<double>(pred.size());
}

void clip_per_tensor(const std::vector<TensorSpec>& tensors, std::span<double> grad, double cap) {
  for (const auto& t : tensors) {
    auto g = grad.subspan(t.offset, t.size());
    double ss = 0.0;
    for (double v : g) ss += v * v;
    const double norm = std::sqrt(ss);
    if (norm > cap) {
      const double s = cap / norm;
      for (double& v : g) v *= s;
    }
  }
}

Adam::Adam(std::size_t n, const AdamConfig& config) : config_(config), m_(n, 0.0), v_(n, 0.0) {
  if (!(config.learning_rate > 0.0) || !(config.decay >= 0.0) || !(config.clip > 0.0) ||
      !(config.beta1 >= 0.0 && config.beta1 < 1.0) || !(config.beta2 >= 0.0 && config.beta2 < 1.0) ||
      !(config.epsilon > 0.0)) {
    throw ConfigError("invalid Adam configuration");
  }
}

double Adam::rate(std::uint64_t k) const {
  return config_.learning_rate / (1.0 + config_.decay * static_cast<double>(k));
}

void Adam::step(std::span<double> params, std::span<double> grad, const std::vector<TensorSpec>& tensors) {
  if (params.size() != m_.size() || grad.size() != m_.size()) throw DomainError("Adam::step: size mismatch");
  clip_per_tensor(tensors, grad, config_.clip);
  const double lr = rate(k_);
  ++k_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(k_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(k_));
  for (std::size_t j = 0; j < params.size(); ++j) {
    m_[j] = config_.beta1 * m_[j] + (1.0 - config_.beta1) * grad[j];
    v_[j] = config_.beta2 * v_[j] + (1.0 - config_.beta2) * grad[j] * grad[j];
    params[j] -= lr * (m_[j] / c1) / (std::sqrt(v_[j] / c2) + config_.epsilon);
  }
}

}  // namespace entrylab::neural
