#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"

#include "entrylab/errors.hpp"
#include "entrylab/train.hpp"

using namespace entrylab;
using namespace entrylab::neural;

namespace {

Architecture small_arch(double dropout = 0.0) {
  Architecture a;
  a.inputs = 3;
  a.hidden = 8;
  a.outputs = 2;
  a.dropout = dropout;
  return a;
}

// Targets are a smooth function of the sequence mean, so a small network can fit them.
SequenceSet synthetic(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> len(3, 8);
  SequenceSet s;
  for (std::size_t k = 0; k < count; ++k) {
    const int n = len(rng);
    std::vector<double> x(static_cast<std::size_t>(n) * 3);
    double mean = 0.0;
    for (auto& v : x) {
      v = u(rng);
      mean += v;
    }
    mean /= static_cast<double>(x.size());
    s.inputs.push_back(x);
    s.targets.push_back({2.0 * mean + 0.5, -mean});
  }
  return s;
}

TrainConfig quick_config(std::size_t epochs, int jobs) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = 8;
  c.seed = 77;
  c.jobs = jobs;
  c.adam.learning_rate = 1e-2;
  return c;
}

}  // namespace

TEST_CASE("training is deterministic and independent of the worker count") {
  const auto data = synthetic(40, 1);
  const auto val = synthetic(10, 2);
  LstmModel a(small_arch(0.2)), b(small_arch(0.2)), c(small_arch(0.2));
  a.initialize(5);
  b.initialize(5);
  c.initialize(5);
  const auto ha = train(a, data, val, quick_config(4, 1));
  const auto hb = train(b, data, val, quick_config(4, 1));
  const auto hc = train(c, data, val, quick_config(4, 3));
  CHECK(std::equal(a.params().begin(), a.params().end(), b.params().begin()));
  CHECK(std::equal(a.params().begin(), a.params().end(), c.params().begin()));
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(ha.epochs[e].train_loss == hc.epochs[e].train_loss);
    CHECK(ha.epochs[e].val_loss == hb.epochs[e].val_loss);
  }

  LstmModel d(small_arch(0.2));
  d.initialize(5);
  auto cfg = quick_config(4, 1);
  cfg.seed = 78;
  train(d, data, val, cfg);
  CHECK_FALSE(std::equal(a.params().begin(), a.params().end(), d.params().begin()));
}

TEST_CASE("loss falls on a learnable problem") {
  const auto data = synthetic(64, 3);
  const auto val = synthetic(16, 4);
  LstmModel m(small_arch());
  m.initialize(6);
  const double before = evaluate_loss(m, val);
  const auto h = train(m, data, val, quick_config(60, 1));
  REQUIRE(h.epochs.size() == 60);
  CHECK(h.epochs.back().train_loss < 0.2 * h.epochs.front().train_loss);
  CHECK(h.epochs.back().val_loss < 0.2 * before);
  for (std::size_t e = 0; e < h.epochs.size(); ++e) CHECK(h.epochs[e].epoch == e + 1);
}

TEST_CASE("batch gradient is the mean of per-sample gradients") {
  const auto data = synthetic(7, 9);
  LstmModel m(small_arch());
  m.initialize(4);
  const std::vector<std::size_t> batch{6, 0, 3, 2, 5};
  const std::vector<std::uint64_t> seeds(batch.size(), 1);
  std::vector<double> grad;
  const double loss = batch_gradient(m, data, batch, seeds, grad, 2);

  std::vector<double> ref(m.param_count(), 0.0);
  double ref_loss = 0.0;
  for (std::size_t k : batch) {
    Trace tr;
    forward_trace(m, data.inputs[k], nullptr, tr);
    std::vector<double> dout(tr.output.size());
    ref_loss += sequence_loss(tr.output, data.targets[k], tr.steps, dout);
    std::vector<double> g(m.param_count(), 0.0);
    BackwardWorkspace ws;
    backward_trace(m, tr, nullptr, dout, g, ws);
    for (std::size_t j = 0; j < g.size(); ++j) ref[j] += g[j] / static_cast<double>(batch.size());
  }
  ref_loss /= static_cast<double>(batch.size());
  CHECK(loss == doctest::Approx(ref_loss).epsilon(1e-13));
  for (std::size_t j = 0; j < ref.size(); ++j) REQUIRE(std::abs(grad[j] - ref[j]) <= 1e-13 * (1.0 + std::abs(ref[j])));
}

TEST_CASE("non-finite loss stops training and restores parameters") {
  auto data = synthetic(8, 5);
  data.targets[3][1] = std::nan("");
  LstmModel m(small_arch());
  m.initialize(2);
  const std::vector<double> before(m.params().begin(), m.params().end());
  auto cfg = quick_config(3, 1);
  cfg.batch_size = 8;
  CHECK_THROWS_AS(train(m, data, {}, cfg), TrainingDiverged);
  CHECK(std::equal(before.begin(), before.end(), m.params().begin()));
}

TEST_CASE("configuration and shape errors") {
  LstmModel m(small_arch());
  auto cfg = quick_config(0, 1);
  CHECK_THROWS_AS(train(m, synthetic(4, 1), {}, cfg), ConfigError);
  auto bad = synthetic(4, 1);
  bad.targets[0].push_back(1.0);
  CHECK_THROWS_AS(train(m, bad, {}, quick_config(1, 1)), DomainError);
}

TEST_CASE("loss history csv") {
  TrainHistory h;
  h.epochs = {{1, 2.0, 3.0}, {2, 1.0, 1.5}};
  const auto path = std::filesystem::temp_directory_path() / "entrylab_loss.csv";
  write_loss_csv(path, h);
  std::ifstream f(path);
  std::string line;
  std::getline(f, line);
  CHECK(line == "epoch,train_loss,val_loss");
  std::size_t rows = 0;
  while (std::getline(f, line)) ++rows;
  CHECK(rows == 2);
  std::filesystem::remove(path);
}
