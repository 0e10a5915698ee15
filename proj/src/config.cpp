#include "entrylab/config.hpp"

#include <fstream>
#include <set>
#include <type_traits>

#include "entrylab/dataset_io.hpp"
#include "entrylab/errors.hpp"
#include "entrylab/seeds.hpp"
#include "entrylab/simulation.hpp"

namespace entrylab::config {

using nlohmann::json;
using nlohmann::ordered_json;
using dynamics::kDeg;

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::desk;
  if (name == "paper") return Scale::paper;
  throw ConfigError("unknown scale '" + std::string(name) + "' (expected desk or paper)");
}

std::string_view scale_name(Scale s) { return s == Scale::desk ? "desk" : "paper"; }

SeedManifest SeedManifest::from_master(std::uint64_t master) {
  constexpr std::uint64_t kManifestStream = 0x5EED;
  SeedManifest m;
  m.data = derive_seed(master, kManifestStream, 0);
  m.train = derive_seed(master, kManifestStream, 1);
  m.init = derive_seed(master, kManifestStream, 2);
  m.evaluation = derive_seed(master, kManifestStream, 3);
  m.test = derive_seed(master, kManifestStream, 4);
  m.campaign = derive_seed(master, kManifestStream, 5);
  return m;
}

RunConfig defaults(Scale scale) {
  RunConfig c;
  c.scale = scale;
  if (scale == Scale::desk) {
    c.training.arch.hidden = 32;
    c.training.train.batch_size = 16;
    c.training.train.epochs = 50;
    c.dataset_count = 250;
    c.curriculum.max_iterations = 3;
    c.curriculum_eval_count = 200;
    c.campaign_count = 200;
    c.test_count = 100;
  } else {
    c.training.arch.hidden = 256;
    c.training.train.batch_size = 128;
    c.training.train.epochs = 500;
    c.dataset_count = 5000;
    c.curriculum.max_iterations = 15;
    c.curriculum_eval_count = 5000;
    c.campaign_count = 5000;
    c.test_count = 1000;
  }
  c.training.validation_fraction = 0.2;
  return c;
}

namespace {

// Reads the keys of one JSON object and remembers which were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError("'" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    const json& v = j_.at(key);
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
    } else if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T>) {
      if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) fail(key, "expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
    }
    out = v.get<T>();
  }

  /// Degrees on disk, radians in memory.
  void degrees(const char* key, double& rad) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    double d = 0.0;
    seen_.erase(key);
    get(key, d);
    rad = d * kDeg;
  }

  Reader block(const char* key) {
    seen_.insert(key);
    static const json empty = json::object();
    return Reader(j_.contains(key) ? j_.at(key) : empty, path_.empty() ? key : path_ + "." + key);
  }

  bool has(const char* key) const { return j_.contains(key); }
  void mark(const char* key) { seen_.insert(key); }
  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (!seen_.count(item.key())) {
        throw ConfigError("unknown key '" + (path_.empty() ? "" : path_ + ".") + item.key() + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& why) const {
    throw ConfigError("'" + (path_.empty() ? "" : path_ + ".") + key + "': " + why);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_exponential(Reader r, atmos::ExponentialModel& m) {
  r.get("surface_density", m.surface_density);
  r.get("scale_height_km", m.scale_height_km);
  r.finish();
}

ordered_json write_exponential(const atmos::ExponentialModel& m) {
  return {{"surface_density", m.surface_density}, {"scale_height_km", m.scale_height_km}};
}

}  // namespace

RunConfig from_json(const json& j, std::optional<Scale> scale_override) {
  Reader root(j, "");
  Scale scale = Scale::paper;
  if (root.has("scale")) {
    std::string s;
    root.get("scale", s);
    scale = parse_scale(s);
  }
  if (scale_override) scale = *scale_override;
  RunConfig c = defaults(scale);

  {
    auto r = root.block("mission");
    auto& m = c.mission;
    r.get("entry_altitude_km", m.entry_altitude_km);
    r.get("entry_speed", m.entry_speed);
    r.get("entry_lon_deg", m.entry_lon_deg);
    r.get("entry_lat_deg", m.entry_lat_deg);
    r.get("entry_fpa_deg", m.entry_fpa_deg);
    if (r.has("entry_heading_deg") && !r.raw("entry_heading_deg").is_null()) {
      double h = 0.0;
      r.get("entry_heading_deg", h);
      m.entry_heading_deg = h;
    } else {
      r.mark("entry_heading_deg");
    }
    r.get("target_altitude_km", m.target_altitude_km);
    r.get("target_speed", m.target_speed);
    r.get("target_lon_deg", m.target_lon_deg);
    r.get("target_lat_deg", m.target_lat_deg);
    r.get("target_range_deg", m.target_range_deg);
    r.finish();
  }
  {
    auto r = root.block("vehicle");
    r.get("mass", c.vehicle.mass);
    r.get("ballistic_coefficient", c.vehicle.ballistic_coefficient);
    r.get("lift_to_drag", c.vehicle.lift_to_drag);
    r.finish();
  }
  {
    auto r = root.block("planet");
    r.get("mu", c.planet.mu);
    r.degrees("omega_deg_s", c.planet.omega);
    r.get("radius", c.planet.radius);
    r.finish();
  }
  {
    auto r = root.block("guidance");
    auto& g = c.guidance;
    r.degrees("final_bank_deg", g.final_bank);
    r.get("tolerance", g.tolerance);
    r.get("frequency_hz", g.frequency_hz);
    r.get("activation_load", g.activation_load);
    r.degrees("deadband_entry_deg", g.deadband_entry);
    r.degrees("deadband_final_deg", g.deadband_final);
    r.get("deadband_entry_speed", g.deadband_entry_speed);
    r.get("deadband_final_speed", g.deadband_final_speed);
    r.degrees("fd_step_deg", g.fd_step);
    r.get("max_halvings", g.max_halvings);
    r.get("max_iterations", g.max_iterations);
    r.degrees("initial_bank_deg", g.initial_bank);
    r.get("predictor_steps", g.predictor_steps);
    r.get("sim_dt", c.sim_dt);
    r.get("max_time", c.max_time);
    r.finish();
  }
  {
    auto r = root.block("atmosphere");
    read_exponential(r.block("onboard"), c.exponential);
    {
      auto g = r.block("gas");
      g.get("gamma", c.gas.gamma);
      g.get("gas_constant", c.gas.gas_constant);
      g.get("reference_temperature", c.gas.reference_temperature);
      g.finish();
    }
    {
      auto s = r.block("surrogate");
      auto& sc = c.surrogate;
      read_exponential(s.block("base"), sc.base);
      s.get("dust_reference", sc.dust_reference);
      s.get("dust_scale_height_gain", sc.dust_scale_height_gain);
      s.get("dust_surface_density_gain", sc.dust_surface_density_gain);
      s.get("wave_amplitude_dex", sc.wave_amplitude_dex);
      s.get("wave_period_km", sc.wave_period_km);
      s.get("correlation_length_km", sc.correlation_length_km);
      s.get("sigma_surface_dex", sc.sigma_surface_dex);
      s.get("sigma_top_dex", sc.sigma_top_dex);
      s.get("sigma_top_km", sc.sigma_top_km);
      s.get("grid_top_km", sc.grid_top_km);
      s.get("grid_step_km", sc.grid_step_km);
      s.get("density_cap", sc.density_cap);
      s.finish();
    }
    r.get("filter_beta", c.filter_beta);
    r.finish();
  }
  {
    auto r = root.block("training");
    auto& a = c.training.arch;
    auto& t = c.training.train;
    r.get("hidden", a.hidden);
    r.get("layers", a.layers);
    r.get("dropout", a.dropout);
    std::string act(neural::activation_name(a.activation));
    r.get("activation", act);
    try {
      a.activation = neural::parse_activation(act);
    } catch (const std::exception& e) {
      r.fail("activation", e.what());
    }
    r.get("epochs", t.epochs);
    r.get("batch_size", t.batch_size);
    r.get("learning_rate", t.adam.learning_rate);
    r.get("decay", t.adam.decay);
    r.get("beta1", t.adam.beta1);
    r.get("beta2", t.adam.beta2);
    r.get("epsilon", t.adam.epsilon);
    r.get("clip", t.adam.clip);
    r.get("validation_fraction", c.training.validation_fraction);
    r.get("dataset_count", c.dataset_count);
    {
      auto k = r.block("curriculum");
      k.get("max_iterations", c.curriculum.max_iterations);
      k.get("tolerance", c.curriculum.tolerance);
      k.get("divergence_streak", c.curriculum.divergence_streak);
      k.get("warm_start", c.curriculum.warm_start);
      k.get("eval_count", c.curriculum_eval_count);
      k.finish();
    }
    r.finish();
  }
  {
    auto r = root.block("campaign");
    r.get("count", c.campaign_count);
    if (r.has("estimators")) {
      const auto& list = r.raw("estimators");
      if (!list.is_array() || list.empty()) r.fail("estimators", "expected a non-empty array of names");
      c.campaign_estimators.clear();
      for (const auto& e : list) {
        if (!e.is_string()) r.fail("estimators", "expected estimator names");
        try {
          const auto kind = estimators::parse_kind(e.get<std::string>());
          if (kind == estimators::Kind::truth) r.fail("estimators", "truth is not a campaign estimator");
          c.campaign_estimators.push_back(kind);
        } catch (const ConfigError&) {
          throw;
        } catch (const std::exception& ex) {
          r.fail("estimators", ex.what());
        }
      }
    }
    r.get("noise", c.noise);
    {
      auto n = r.block("noise_levels");
      auto& s = c.noise_levels;
      n.get("r_m", s.r);
      n.get("angle_deg", s.angle_deg);
      n.get("v_m_s", s.v);
      n.get("path_deg", s.path_deg);
      n.get("accel_g", s.accel_g);
      n.get("pressure_fraction", s.pressure_fraction);
      n.finish();
    }
    r.get("test_count", c.test_count);
    r.finish();
  }
  {
    auto r = root.block("seeds");
    r.get("data", c.seeds.data);
    r.get("train", c.seeds.train);
    r.get("init", c.seeds.init);
    r.get("evaluation", c.seeds.evaluation);
    r.get("test", c.seeds.test);
    r.get("campaign", c.seeds.campaign);
    r.finish();
  }
  root.finish();
  validate(c);
  return c;
}

RunConfig load(const std::string& path, std::optional<Scale> scale_override) {
  if (path == "default") {
    RunConfig c = defaults(scale_override.value_or(Scale::paper));
    validate(c);
    return c;
  }
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j, scale_override);
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["scale"] = scale_name(c.scale);
  const auto& m = c.mission;
  j["mission"] = {{"entry_altitude_km", m.entry_altitude_km},
                  {"entry_speed", m.entry_speed},
                  {"entry_lon_deg", m.entry_lon_deg},
                  {"entry_lat_deg", m.entry_lat_deg},
                  {"entry_fpa_deg", m.entry_fpa_deg},
                  {"entry_heading_deg", m.entry_heading_deg ? ordered_json(*m.entry_heading_deg) : ordered_json()},
                  {"target_altitude_km", m.target_altitude_km},
                  {"target_speed", m.target_speed},
                  {"target_lon_deg", m.target_lon_deg},
                  {"target_lat_deg", m.target_lat_deg},
                  {"target_range_deg", m.target_range_deg}};
  j["vehicle"] = {{"mass", c.vehicle.mass},
                  {"ballistic_coefficient", c.vehicle.ballistic_coefficient},
                  {"lift_to_drag", c.vehicle.lift_to_drag}};
  j["planet"] = {{"mu", c.planet.mu}, {"omega_deg_s", c.planet.omega / kDeg}, {"radius", c.planet.radius}};
  const auto& g = c.guidance;
  j["guidance"] = {{"final_bank_deg", g.final_bank / kDeg},
                   {"tolerance", g.tolerance},
                   {"frequency_hz", g.frequency_hz},
                   {"activation_load", g.activation_load},
                   {"deadband_entry_deg", g.deadband_entry / kDeg},
                   {"deadband_final_deg", g.deadband_final / kDeg},
                   {"deadband_entry_speed", g.deadband_entry_speed},
                   {"deadband_final_speed", g.deadband_final_speed},
                   {"fd_step_deg", g.fd_step / kDeg},
                   {"max_halvings", g.max_halvings},
                   {"max_iterations", g.max_iterations},
                   {"initial_bank_deg", g.initial_bank / kDeg},
                   {"predictor_steps", g.predictor_steps},
                   {"sim_dt", c.sim_dt},
                   {"max_time", c.max_time}};
  const auto& s = c.surrogate;
  j["atmosphere"] = {
      {"onboard", write_exponential(c.exponential)},
      {"gas",
       {{"gamma", c.gas.gamma},
        {"gas_constant", c.gas.gas_constant},
        {"reference_temperature", c.gas.reference_temperature}}},
      {"surrogate",
       {{"base", write_exponential(s.base)},
        {"dust_reference", s.dust_reference},
        {"dust_scale_height_gain", s.dust_scale_height_gain},
        {"dust_surface_density_gain", s.dust_surface_density_gain},
        {"wave_amplitude_dex", s.wave_amplitude_dex},
        {"wave_period_km", s.wave_period_km},
        {"correlation_length_km", s.correlation_length_km},
        {"sigma_surface_dex", s.sigma_surface_dex},
        {"sigma_top_dex", s.sigma_top_dex},
        {"sigma_top_km", s.sigma_top_km},
        {"grid_top_km", s.grid_top_km},
        {"grid_step_km", s.grid_step_km},
        {"density_cap", s.density_cap}}},
      {"filter_beta", c.filter_beta}};
  const auto& a = c.training.arch;
  const auto& t = c.training.train;
  j["training"] = {{"hidden", a.hidden},
                   {"layers", a.layers},
                   {"dropout", a.dropout},
                   {"activation", neural::activation_name(a.activation)},
                   {"epochs", t.epochs},
                   {"batch_size", t.batch_size},
                   {"learning_rate", t.adam.learning_rate},
                   {"decay", t.adam.decay},
                   {"beta1", t.adam.beta1},
                   {"beta2", t.adam.beta2},
                   {"epsilon", t.adam.epsilon},
                   {"clip", t.adam.clip},
                   {"validation_fraction", c.training.validation_fraction},
                   {"dataset_count", c.dataset_count},
                   {"curriculum",
                    {{"max_iterations", c.curriculum.max_iterations},
                     {"tolerance", c.curriculum.tolerance},
                     {"divergence_streak", c.curriculum.divergence_streak},
                     {"warm_start", c.curriculum.warm_start},
                     {"eval_count", c.curriculum_eval_count}}}};
  ordered_json names = ordered_json::array();
  for (auto k : c.campaign_estimators) names.push_back(estimators::kind_name(k));
  const auto& n = c.noise_levels;
  j["campaign"] = {{"count", c.campaign_count},
                   {"estimators", names},
                   {"noise", c.noise},
                   {"noise_levels",
                    {{"r_m", n.r},
                     {"angle_deg", n.angle_deg},
                     {"v_m_s", n.v},
                     {"path_deg", n.path_deg},
                     {"accel_g", n.accel_g},
                     {"pressure_fraction", n.pressure_fraction}}},
                   {"test_count", c.test_count}};
  j["seeds"] = {{"data", c.seeds.data},
                {"train", c.seeds.train},
                {"init", c.seeds.init},
                {"evaluation", c.seeds.evaluation},
                {"test", c.seeds.test},
                {"campaign", c.seeds.campaign}};
  return j;
}

std::string hash(const RunConfig& c) { return pipeline::fnv1a_hex(to_json(c).dump()); }

void validate(const RunConfig& c) {
  try {
    sim::SimSetup s;
    s.mission = c.mission;
    s.vehicle = c.vehicle;
    s.planet = c.planet;
    s.guidance = c.guidance;
    s.dt = c.sim_dt;
    s.max_time = c.max_time;
    sim::validate(s);
    atmos::validate(c.gas);
    neural::validate(c.training.arch);
    neural::validate(c.training.train);
    evalmc::validate(c.noise_levels);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(c.exponential.surface_density > 0.0 && c.exponential.scale_height_km > 0.0) ||
      !(c.surrogate.base.surface_density > 0.0 && c.surrogate.base.scale_height_km > 0.0)) {
    throw ConfigError("exponential density models need positive surface density and scale height");
  }
  if (!(c.filter_beta > 0.0 && c.filter_beta < 1.0)) throw ConfigError("filter beta must lie in (0, 1)");
  if (!(c.training.validation_fraction > 0.0 && c.training.validation_fraction < 1.0)) {
    throw ConfigError("validation fraction must lie in (0, 1)");
  }
  if (c.dataset_count < 2 || c.campaign_count < 1 || c.curriculum_eval_count < 1 || c.test_count < 1) {
    throw ConfigError("dataset, campaign and test counts must be positive");
  }
  if (c.curriculum.max_iterations < 1 || !(c.curriculum.tolerance > 0.0) || c.curriculum.divergence_streak < 1) {
    throw ConfigError("curriculum needs at least one iteration, a positive tolerance and streak");
  }
  if (c.campaign_estimators.empty()) throw ConfigError("campaign needs at least one estimator");
}

pipeline::CaseSetup case_setup(const RunConfig& c, estimators::Kind kind, bool noise) {
  pipeline::CaseSetup s;
  s.sim.mission = c.mission;
  s.sim.vehicle = c.vehicle;
  s.sim.planet = c.planet;
  s.sim.guidance = c.guidance;
  s.sim.dt = c.sim_dt;
  s.sim.max_time = c.max_time;
  s.estimator = kind;
  s.context.exponential = c.exponential;
  s.context.vehicle = c.vehicle;
  s.context.planet = c.planet;
  s.context.filter_beta = c.filter_beta;
  s.gas = c.gas;
  s.surrogate = c.surrogate;
  if (noise) s.noise = c.noise_levels;
  return s;
}

}  // namespace entrylab::config
