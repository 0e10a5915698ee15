// entrylab: dataset generation, training, curriculum, campaigns and density
// error maps from one configuration file.
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration error,
// 3 curriculum divergence.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "entrylab/config.hpp"
#include "entrylab/curriculum.hpp"
#include "entrylab/dataset_io.hpp"
#include "entrylab/errors.hpp"
#include "entrylab/evalmc.hpp"
#include "entrylab/model_io.hpp"
#include "entrylab/parallel.hpp"
#include "entrylab/seeds.hpp"

namespace fs = std::filesystem;
using namespace entrylab;
using nlohmann::ordered_json;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;

struct Globals {
  std::string config = "default";
  std::optional<std::uint64_t> seed;
  int jobs = 0;
  std::optional<std::string> scale;
};

config::RunConfig resolve(const Globals& g) {
  std::optional<config::Scale> scale;
  if (g.scale) scale = config::parse_scale(*g.scale);
  auto c = config::load(g.config, scale);
  if (g.seed) c.seeds = config::SeedManifest::from_master(*g.seed);
  return c;
}

// Records what a command read and wrote; written last so that a present
// manifest means a complete run.
class RunManifest {
 public:
  RunManifest(std::string command, const config::RunConfig& c, const fs::path& out) : out_(out) {
    j_["command"] = std::move(command);
    j_["config_hash"] = config::hash(c);
    j_["scale"] = config::scale_name(c.scale);
    j_["seeds"] = config::to_json(c)["seeds"];
    j_["inputs"] = ordered_json::object();
    j_["outputs"] = ordered_json::array();
    fs::create_directories(out);
    std::ofstream f(out / "config.json");
    if (!f) throw IngestError("cannot write " + (out / "config.json").string());
    f << config::to_json(c).dump(2) << '\n';
    output(out / "config.json");
  }

  void input(const std::string& name, const fs::path& p) { j_["inputs"][name] = p.string(); }
  void output(const fs::path& p) { j_["outputs"].push_back(fs::relative(p, out_).generic_string()); }
  void set(const std::string& key, ordered_json v) { j_[key] = std::move(v); }

  void write() {
    std::ofstream f(out_ / "run_manifest.json");
    if (!f) throw IngestError("cannot write run manifest in " + out_.string());
    f << j_.dump(2) << '\n';
  }

 private:
  fs::path out_;
  ordered_json j_;
};

std::shared_ptr<const neural::LstmModel> load_shared(const std::string& path) {
  return std::make_shared<const neural::LstmModel>(neural::load_model(path));
}

pipeline::Dataset generate(const config::RunConfig& c, estimators::Kind kind, bool noise,
                           std::shared_ptr<const neural::LstmModel> model, std::size_t count, std::uint64_t seed,
                           int jobs) {
  auto setup = config::case_setup(c, kind, noise);
  setup.context.model = std::move(model);
  return pipeline::generate_dataset(setup, count, seed, jobs);
}

void report_dataset(const pipeline::Dataset& d, std::size_t requested) {
  std::cout << "trajectories: " << requested << " requested, " << d.samples.size() << " kept, " << d.failures
            << " excluded\n";
  for (const auto& r : d.failure_reasons) std::cout << "  excluded " << r << '\n';
}

// ---------------------------------------------------------------------------

struct GenDataArgs {
  std::string out;
  std::optional<std::size_t> count;
  std::string estimator = "exponential";
  std::string model;
  bool noise = false;
};

int cmd_gen_data(const Globals& g, const GenDataArgs& a) {
  const auto c = resolve(g);
  const auto kind = estimators::parse_kind(a.estimator);
  if (kind == estimators::Kind::truth) throw ConfigError("datasets are generated with a flight estimator");
  if (kind == estimators::Kind::lstm && a.model.empty()) throw ConfigError("--estimator lstm requires --model");
  const std::size_t count = a.count.value_or(c.dataset_count);
  if (count == 0) throw ConfigError("--count must be positive");

  RunManifest manifest("gen-data", c, a.out);
  std::shared_ptr<const neural::LstmModel> model;
  if (!a.model.empty()) {
    model = load_shared(a.model);
    manifest.input("model", a.model);
  }
  const auto data = generate(c, kind, a.noise, model, count, c.seeds.data, g.jobs);
  report_dataset(data, count);
  if (data.samples.empty()) {
    std::cerr << "error: every trajectory failed\n";
    return kExitRuntime;
  }
  pipeline::DatasetManifest dm;
  dm.estimator = a.estimator;
  dm.noise = a.noise;
  dm.master_seed = c.seeds.data;
  dm.requested = count;
  dm.config_hash = config::hash(c);
  const fs::path dir = fs::path(a.out) / "dataset";
  pipeline::write_dataset(dir, data, dm);
  for (const char* f : {"manifest.json", "records.bin", "norm_stats.json"}) manifest.output(dir / f);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string init;
  std::optional<std::size_t> epochs;
};

int cmd_train(const Globals& g, const TrainArgs& a) {
  auto c = resolve(g);
  if (a.epochs) c.training.train.epochs = *a.epochs;
  c.training.train.seed = c.seeds.train;
  c.training.train.jobs = g.jobs;
  c.training.init_seed = c.seeds.init;
  config::validate(c);

  RunManifest manifest("train", c, a.out);
  manifest.input("dataset", a.data);
  const auto data = pipeline::read_dataset(a.data);
  std::optional<neural::LstmModel> warm;
  if (!a.init.empty()) {
    warm = neural::load_model(a.init);
    manifest.input("init", a.init);
  }
  const auto trained = pipeline::train_on_dataset(data, c.training, warm ? &*warm : nullptr);
  const fs::path out(a.out);
  neural::save_model(out / "model.json", trained.model);
  neural::write_loss_csv(out / "loss.csv", trained.history);
  manifest.output(out / "model.json");
  manifest.output(out / "loss.csv");
  const auto& last = trained.history.epochs.back();
  std::cout << "epochs " << trained.history.epochs.size() << ", train loss " << last.train_loss << ", val loss "
            << last.val_loss << '\n';
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------

struct CurriculumArgs {
  std::string data;
  std::string out;
  std::optional<std::size_t> iterations;
};

void write_signed(const fs::path& path, const std::vector<double>& v) {
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17) << "s_f_km\n";
  for (double x : v) f << x << '\n';
}

int cmd_curriculum(const Globals& g, const CurriculumArgs& a) {
  auto c = resolve(g);
  if (a.iterations) c.curriculum.max_iterations = *a.iterations;
  c.training.train.seed = c.seeds.train;
  c.training.train.jobs = g.jobs;
  c.training.init_seed = c.seeds.init;
  config::validate(c);

  RunManifest manifest("curriculum", c, a.out);
  const fs::path out(a.out);
  pipeline::Dataset initial;
  if (!a.data.empty()) {
    manifest.input("dataset", a.data);
    initial = pipeline::read_dataset(a.data);
  } else {
    initial = generate(c, estimators::Kind::exponential, false, nullptr, c.dataset_count, c.seeds.data, g.jobs);
    report_dataset(initial, c.dataset_count);
  }

  pipeline::CurriculumSetup cs;
  cs.base = config::case_setup(c, estimators::Kind::lstm, false);
  cs.train = c.training;
  cs.data_count = c.dataset_count;
  cs.eval_count = c.curriculum_eval_count;
  cs.data_seed = c.seeds.data;
  cs.eval_seed = c.seeds.evaluation;
  cs.jobs = g.jobs;
  auto hooks = pipeline::default_hooks(cs);
  std::vector<pipeline::IterationRecord> done;
  hooks.on_iteration = [&](const pipeline::IterationRecord& r, const neural::LstmModel& m) {
    const fs::path dir = out / ("iteration_" + std::to_string(r.iteration));
    fs::create_directories(dir);
    neural::save_model(dir / "model.json", m);
    neural::write_loss_csv(dir / "loss.csv", r.history);
    write_signed(dir / "s_f.csv", r.signed_km);
    for (const char* f : {"model.json", "loss.csv", "s_f.csv"}) manifest.output(dir / f);
    done.push_back(r);
    pipeline::write_history_csv(out / "history.csv", done);
    std::cout << "iteration " << r.iteration << ": mu " << r.mu_km << " km, sigma " << r.sigma_km << " km"
              << (r.converged ? " (converged)" : "") << std::endl;
  };

  const auto res = pipeline::run_curriculum(std::move(initial), c.curriculum, hooks);
  manifest.output(out / "history.csv");
  neural::save_model(out / "model.json", *res.model);
  manifest.output(out / "model.json");
  manifest.set("converged", res.converged);
  manifest.set("diverged", res.diverged);
  manifest.write();
  if (res.diverged) {
    std::cerr << "error: mean |s_f| grew for " << c.curriculum.divergence_streak
              << " consecutive iterations; history kept in " << (out / "history.csv").string() << '\n';
    return kExitDiverged;
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct CampaignArgs {
  std::string out;
  std::string model;
  std::vector<std::string> estimators;
  std::optional<std::size_t> count;
  bool noise = false;
};

int cmd_campaign(const Globals& g, const CampaignArgs& a) {
  auto c = resolve(g);
  if (a.count) c.campaign_count = *a.count;
  if (a.noise) c.noise = true;
  if (!a.estimators.empty()) {
    c.campaign_estimators.clear();
    for (const auto& e : a.estimators) c.campaign_estimators.push_back(estimators::parse_kind(e));
  }
  config::validate(c);
  const bool wants_lstm = std::find(c.campaign_estimators.begin(), c.campaign_estimators.end(),
                                    estimators::Kind::lstm) != c.campaign_estimators.end();
  if (wants_lstm && a.model.empty()) throw ConfigError("the lstm estimator requires --model");

  RunManifest manifest("campaign", c, a.out);
  std::shared_ptr<const neural::LstmModel> model;
  if (!a.model.empty()) {
    model = load_shared(a.model);
    manifest.input("model", a.model);
  }
  const fs::path out(a.out);
  std::vector<evalmc::Summary> rows;
  for (auto kind : c.campaign_estimators) {
    auto setup = config::case_setup(c, kind, c.noise);
    setup.context.model = model;
    const auto res = evalmc::run_campaign(setup, c.campaign_count, c.seeds.campaign, g.jobs);
    const std::string name = res.estimator + (c.noise ? "_noisy" : "");
    const fs::path dir = out / name;
    fs::create_directories(dir);
    evalmc::write_results_csv(dir / "results.csv", res);
    evalmc::write_histogram_csv(dir / "histogram.csv", res);
    manifest.output(dir / "results.csv");
    manifest.output(dir / "histogram.csv");
    for (const auto& cr : res.cases) {
      if (!cr.ok) std::cout << "  case " << cr.case_id << " failed: " << cr.failure << '\n';
    }
    if (res.summary.cases == 0) {
      std::cerr << "error: every " << res.estimator << " case failed\n";
      return kExitRuntime;
    }
    rows.push_back(res.summary);
  }
  evalmc::write_summary_json(out / "summary.json", rows);
  manifest.output(out / "summary.json");
  std::cout << evalmc::compare(rows);
  manifest.write();
  return 0;
}

// ---------------------------------------------------------------------------

struct ErrorMapArgs {
  std::string out;
  std::string model;
  std::string data;
};

int cmd_error_map(const Globals& g, const ErrorMapArgs& a) {
  const auto c = resolve(g);
  RunManifest manifest("error-map", c, a.out);
  manifest.input("model", a.model);
  const auto model = neural::load_model(a.model);
  pipeline::Dataset test;
  if (!a.data.empty()) {
    manifest.input("dataset", a.data);
    test = pipeline::read_dataset(a.data);
  } else {
    test = generate(c, estimators::Kind::exponential, false, nullptr, c.test_count, c.seeds.test, g.jobs);
    report_dataset(test, c.test_count);
  }
  const auto map = evalmc::density_error_map(model, test.samples);
  const fs::path out(a.out);
  evalmc::write_error_map_csv(out / "errormap.csv", map);
  ordered_json s{{"test_cases", test.samples.size()},
                 {"first_step_percent", map.first_step},
                 {"full_length_percent", map.full_length},
                 {"quartile_percent", map.quartiles}};
  {
    std::ofstream f(out / "errormap_summary.json");
    if (!f) throw IngestError("cannot write error map summary");
    f << s.dump(2) << '\n';
  }
  manifest.output(out / "errormap.csv");
  manifest.output(out / "errormap_summary.json");
  std::cout << "mean density error: first step " << map.first_step << " %, full length " << map.full_length
            << " %\n";
  manifest.write();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entry guidance laboratory: data generation, LSTM training, curriculum and Monte Carlo campaigns"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "JSON run configuration, or 'default' for the reference setup")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "Master seed; derives every seed of the manifest");
  app.add_option("--jobs", g.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--scale", g.scale, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));

  GenDataArgs gd;
  auto* gen = app.add_subcommand("gen-data", "Simulate trajectories and write a training dataset");
  gen->add_option("--out", gd.out, "Output directory")->required();
  gen->add_option("--count", gd.count, "Number of trajectories");
  gen->add_option("--estimator", gd.estimator, "exponential, filter or lstm")->capture_default_str();
  gen->add_option("--model", gd.model, "Model file for the lstm estimator");
  gen->add_flag("--noise", gd.noise, "Corrupt the measurements with sensor noise");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train the density network on a dataset");
  train->add_option("--data", tr.data, "Dataset directory")->required();
  train->add_option("--out", tr.out, "Output directory")->required();
  train->add_option("--init", tr.init, "Model whose weights start the training");
  train->add_option("--epochs", tr.epochs, "Override the configured epoch count");

  CurriculumArgs cu;
  auto* curr = app.add_subcommand("curriculum", "Iterate training and data regeneration until convergence");
  curr->add_option("--data", cu.data, "Initial dataset (generated with the exponential estimator if omitted)");
  curr->add_option("--out", cu.out, "Output directory")->required();
  curr->add_option("--iterations", cu.iterations, "Override the iteration cap");

  CampaignArgs ca;
  auto* camp = app.add_subcommand("campaign", "Monte Carlo comparison of density estimators");
  camp->add_option("--out", ca.out, "Output directory")->required();
  camp->add_option("--model", ca.model, "Model file, required for the lstm estimator");
  camp->add_option("--estimators", ca.estimators, "Subset of exponential, filter, lstm");
  camp->add_option("--count", ca.count, "Cases per estimator");
  camp->add_flag("--noise", ca.noise, "Corrupt the measurements with sensor noise");

  ErrorMapArgs em;
  auto* emap = app.add_subcommand("error-map", "Density error by sequence length and altitude");
  emap->add_option("--out", em.out, "Output directory")->required();
  emap->add_option("--model", em.model, "Model file")->required();
  emap->add_option("--data", em.data, "Test dataset (generated from the test seed if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    g.jobs = resolve_jobs(g.jobs);
    if (*gen) return cmd_gen_data(g, gd);
    if (*train) return cmd_train(g, tr);
    if (*curr) return cmd_curriculum(g, cu);
    if (*camp) return cmd_campaign(g, ca);
    if (*emap) return cmd_error_map(g, em);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
