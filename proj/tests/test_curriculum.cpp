#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "doctest.h"

#include "entrylab/curriculum.hpp"
#include "entrylab/errors.hpp"

using namespace entrylab;
using namespace entrylab::pipeline;

namespace {

Dataset fake_dataset(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Dataset d;
  for (std::size_t k = 0; k < count; ++k) {
    TrajectorySample s;
    s.case_seed = k;
    for (std::size_t t = 0; t < 4 + k % 3; ++t) {
      FeatureVector f;
      for (auto& v : f) v = n(rng);
      s.features.push_back(f);
      s.times.push_back(static_cast<double>(t));
    }
    for (auto& e : s.target.eta) e = 1.0 + 0.1 * n(rng);
    d.samples.push_back(s);
  }
  return d;
}

TrainSetup tiny_setup() {
  TrainSetup t;
  t.arch.hidden = 4;
  t.train.epochs = 2;
  t.train.batch_size = 4;
  t.init_seed = 3;
  return t;
}

// Hooks whose evaluation returns a scripted list per iteration.
CurriculumHooks scripted(std::vector<std::vector<double>> per_iteration, std::vector<bool>* warm_seen = nullptr) {
  CurriculumHooks h;
  h.train = [warm_seen](const Dataset&, const neural::LstmModel* warm, std::size_t) {
    if (warm_seen) warm_seen->push_back(warm != nullptr);
    TrainedModel t;
    t.model = neural::LstmModel(neural::Architecture{});
    return t;
  };
  h.evaluate = [per_iteration](const neural::LstmModel&, std::size_t k) { return per_iteration.at(k - 1); };
  h.regenerate = [](const neural::LstmModel&, std::size_t) { return Dataset{}; };
  return h;
}

}  // namespace

TEST_CASE("magnitude statistics and relative change") {
  const auto [mu, sigma] = magnitude_stats({-1.0, 3.0});
  CHECK(mu == 2.0);
  CHECK(sigma == 1.0);
  CHECK(relative_change(1.00, 0.90) == doctest::Approx(0.10));
  CHECK(relative_change(0.90, 0.88) == doctest::Approx(0.02 / 0.90));
  CHECK(relative_change(0.90, 0.88) * 100.0 == doctest::Approx(2.2222).epsilon(1e-4));
  CHECK(relative_change(0.0, 0.0) == 0.0);
  CHECK(std::isinf(relative_change(0.0, 1.0)));
}

TEST_CASE("a fixed model converges at the second iteration") {
  std::vector<bool> warm;
  const auto res = run_curriculum(Dataset{}, CurriculumConfig{}, scripted({{1.0, -2.0}, {1.0, -2.0}, {9.0}}, &warm));
  REQUIRE(res.iterations.size() == 2);
  CHECK(res.converged);
  CHECK_FALSE(res.diverged);
  CHECK_FALSE(res.iterations[0].converged);
  CHECK(res.iterations[1].converged);
  CHECK(warm == std::vector<bool>{false, true});
}

TEST_CASE("tolerance applies to both mean and spread") {
  // mu 1.00 -> 0.90 -> 0.88: the last change is 2.2 %, sigma stays 0.
  const auto res = run_curriculum(Dataset{}, CurriculumConfig{},
                                  scripted({{1.0, 1.0}, {0.9, 0.9}, {0.88, -0.88}, {0.0}}));
  REQUIRE(res.iterations.size() == 3);
  CHECK(res.converged);

  // Same means but a changing spread keeps iterating.
  const auto spread = run_curriculum(Dataset{}, CurriculumConfig{},
                                     scripted({{1.0, 1.0}, {0.5, 1.5}, {0.2, 1.8}, {0.2, 1.8}}));
  CHECK(spread.iterations.size() == 4);
  CHECK(spread.converged);
}

TEST_CASE("three consecutive rises abort") {
  const auto res = run_curriculum(Dataset{}, CurriculumConfig{}, scripted({{1.0}, {2.0}, {3.0}, {4.0}, {5.0}}));
  CHECK(res.diverged);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations.size() == 4);

  const auto capped = run_curriculum(Dataset{}, CurriculumConfig{2, 0.03, 3, true}, scripted({{1.0}, {2.0}}));
  CHECK(capped.iterations.size() == 2);
  CHECK_FALSE(capped.converged);
  CHECK_FALSE(capped.diverged);

  CHECK_THROWS_AS(run_curriculum(Dataset{}, CurriculumConfig{0, 0.03, 3, true}, scripted({})), ConfigError);
}

TEST_CASE("cold start when warm start is disabled") {
  std::vector<bool> warm;
  CurriculumConfig cfg;
  cfg.warm_start = false;
  run_curriculum(Dataset{}, cfg, scripted({{1.0}, {1.0}}, &warm));
  CHECK(warm == std::vector<bool>{false, false});
}

TEST_CASE("training on a dataset splits off the trailing validation share") {
  const auto data = fake_dataset(10, 1);
  const auto t = train_on_dataset(data, tiny_setup());
  REQUIRE(t.history.epochs.size() == 2);
  CHECK(std::isfinite(t.history.epochs[0].val_loss));
  CHECK(t.model.norm.feature_mean.size() == kFeatureCount);

  std::vector<TrajectorySample> head(data.samples.begin(), data.samples.begin() + 8);
  const auto stats = compute_norm_stats(head);
  CHECK(t.model.norm.feature_mean == stats.feature_mean);

  const auto seqs = to_sequences(head, stats);
  CHECK(seqs.size() == 8);
  CHECK(seqs.inputs[0].size() == head[0].features.size() * kFeatureCount);
  CHECK(seqs.targets[0].size() == atmos::kGridNodes);

  // Zero epochs are invalid, so compare a warm start against its source after one epoch of tiny steps.
  auto setup = tiny_setup();
  setup.train.epochs = 1;
  setup.train.adam.learning_rate = 1e-12;
  const auto warm = train_on_dataset(data, setup, &t.model);
  double diff = 0.0;
  for (std::size_t i = 0; i < warm.model.param_count(); ++i) {
    diff = std::max(diff, std::abs(warm.model.params()[i] - t.model.params()[i]));
  }
  CHECK(diff < 1e-9);

  CHECK_THROWS(train_on_dataset(fake_dataset(1, 2), tiny_setup()));
}

TEST_CASE("history csv") {
  IterationRecord a;
  a.iteration = 1;
  a.mu_km = 1.5;
  a.sigma_km = 0.5;
  const auto path = std::filesystem::temp_directory_path() / "entrylab_history.csv";
  write_history_csv(path, {a});
  std::ifstream f(path);
  std::string header, row;
  std::getline(f, header);
  std::getline(f, row);
  CHECK(header == "iteration,mu_km,sigma_km,converged");
  CHECK(row.rfind("1,1.5,0.5,", 0) == 0);
  std::filesystem::remove(path);
}
