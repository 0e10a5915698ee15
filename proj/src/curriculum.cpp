#include "entrylab/curriculum.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

#include "entrylab/errors.hpp"
#include "entrylab/evalmc.hpp"
#include "entrylab/seeds.hpp"

namespace entrylab::pipeline {

namespace {
constexpr std::uint64_t kRegenerateStream = 0xC0;
}

neural::SequenceSet to_sequences(const std::vector<TrajectorySample>& samples, const NormalizationStats& stats) {
  neural::SequenceSet set;
  for (const auto& s : samples) {
    set.inputs.push_back(normalized_inputs(s, stats));
    set.targets.push_back(normalized_target(s, stats));
  }
  return set;
}

TrainedModel train_on_dataset(const Dataset& data, const TrainSetup& setup, const neural::LstmModel* warm) {
  if (!(setup.validation_fraction >= 0.0 && setup.validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in [0, 1)");
  }
  const std::size_t K = data.samples.size();
  const auto n_val = static_cast<std::size_t>(std::ceil(setup.validation_fraction * static_cast<double>(K)));
  if (K < 2 || n_val >= K) throw DomainError("dataset too small to split into training and validation sets");
  const std::vector<TrajectorySample> tr(data.samples.begin(), data.samples.end() - static_cast<std::ptrdiff_t>(n_val));
  const std::vector<TrajectorySample> va(data.samples.end() - static_cast<std::ptrdiff_t>(n_val), data.samples.end());

  TrainedModel out{neural::LstmModel(setup.arch), {}};
  if (warm && warm->param_count() == out.model.param_count()) {
    std::copy(warm->params().begin(), warm->params().end(), out.model.params().begin());
    out.model.seed = warm->seed;
  } else {
    out.model.initialize(setup.init_seed);
  }
  out.model.norm = compute_norm_stats(tr);
  out.history = neural::train(out.model, to_sequences(tr, out.model.norm), to_sequences(va, out.model.norm),
                              setup.train);
  return out;
}

std::pair<double, double> magnitude_stats(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("no terminal range-to-go values");
  double mean = 0.0;
  for (double x : v) mean += std::abs(x);
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (std::abs(x) - mean) * (std::abs(x) - mean);
  return {mean, std::sqrt(var / static_cast<double>(v.size()))};
}

double relative_change(double prev, double cur) {
  if (prev == 0.0) return cur == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return std::abs(cur - prev) / std::abs(prev);
}

CurriculumResult run_curriculum(Dataset data, const CurriculumConfig& config, const CurriculumHooks& hooks) {
  if (config.max_iterations < 1) throw ConfigError("curriculum needs at least one iteration");
  if (!(config.tolerance > 0.0)) throw ConfigError("curriculum tolerance must be positive");
  if (!hooks.train || !hooks.evaluate || !hooks.regenerate) throw ConfigError("curriculum hooks are incomplete");
  CurriculumResult res;
  std::size_t rising = 0;
  for (std::size_t k = 1; k <= config.max_iterations; ++k) {
    const neural::LstmModel* warm = config.warm_start && res.model ? res.model.get() : nullptr;
    auto trained = hooks.train(data, warm, k);
    auto model = std::make_shared<const neural::LstmModel>(std::move(trained.model));

    IterationRecord rec;
    rec.iteration = k;
    rec.history = std::move(trained.history);
    rec.signed_km = hooks.evaluate(*model, k);
    std::tie(rec.mu_km, rec.sigma_km) = magnitude_stats(rec.signed_km);
    if (!res.iterations.empty()) {
      const auto& prev = res.iterations.back();
      rec.converged = relative_change(prev.mu_km, rec.mu_km) <= config.tolerance &&
                      relative_change(prev.sigma_km, rec.sigma_km) <= config.tolerance;
      rising = rec.mu_km > prev.mu_km ? rising + 1 : 0;
    }
    res.model = model;
    res.iterations.push_back(rec);
    if (hooks.on_iteration) hooks.on_iteration(res.iterations.back(), *model);
    if (rec.converged) {
      res.converged = true;
      break;
    }
    if (rising >= config.divergence_streak) {
      res.diverged = true;
      break;
    }
    if (k < config.max_iterations) data = hooks.regenerate(*model, k);
  }
  return res;
}

CurriculumHooks default_hooks(const CurriculumSetup& setup) {
  CurriculumHooks h;
  h.train = [setup](const Dataset& data, const neural::LstmModel* warm, std::size_t iteration) {
    auto ts = setup.train;
    ts.train.seed = derive_seed(setup.train.train.seed, kShuffleStream, iteration);
    return train_on_dataset(data, ts, warm);
  };
  h.evaluate = [setup](const neural::LstmModel& model, std::size_t) {
    CaseSetup cs = setup.base;
    cs.estimator = estimators::Kind::lstm;
    cs.context.model = std::make_shared<const neural::LstmModel>(model);
    const auto campaign = evalmc::run_campaign(cs, setup.eval_count, setup.eval_seed, setup.jobs);
    std::vector<double> out;
    for (const auto& c : campaign.cases) {
      if (c.ok) out.push_back(c.s_f_km);
    }
    return out;
  };
  h.regenerate = [setup](const neural::LstmModel& model, std::size_t iteration) {
    CaseSetup cs = setup.base;
    cs.estimator = estimators::Kind::lstm;
    cs.context.model = std::make_shared<const neural::LstmModel>(model);
    return generate_dataset(cs, setup.data_count, derive_seed(setup.data_seed, kRegenerateStream, iteration),
                            setup.jobs);
  };
  return h;
}

void write_history_csv(const std::filesystem::path& path, const std::vector<IterationRecord>& iterations) {
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17);
  f << "iteration,mu_km,sigma_km,converged\n";
  for (const auto& r : iterations) {
    f << r.iteration << ',' << r.mu_km << ',' << r.sigma_km << ',' << (r.converged ? 1 : 0) << '\n';
  }
}

}  // namespace entrylab::pipeline
