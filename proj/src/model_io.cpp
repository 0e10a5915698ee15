#include "entrylab/model_io.hpp"

#include <fstream>

#include "json.hpp"

#include "entrylab/errors.hpp"

namespace entrylab::neural {

using nlohmann::json;
using nlohmann::ordered_json;

void save_model(const std::filesystem::path& path, const LstmModel& model) {
  const auto& a = model.arch();
  ordered_json j;
  j["format"] = "entrylab-lstm";
  j["version"] = kModelFormatVersion;
  j["architecture"] = {{"inputs", a.inputs},   {"hidden", a.hidden},
                       {"outputs", a.outputs}, {"layers", a.layers},
                       {"dropout", a.dropout}, {"hidden_activation", activation_name(a.activation)}};
  j["seed"] = model.seed;
  j["normalization"] = {{"feature_mean", model.norm.feature_mean},
                        {"feature_std", model.norm.feature_std},
                        {"target_mean", model.norm.target_mean},
                        {"target_std", model.norm.target_std}};
  auto tensors = ordered_json::array();
  const auto p = model.params();
  for (const auto& t : model.tensors()) {
    tensors.push_back({{"name", t.name},
                       {"rows", t.rows},
                       {"cols", t.cols},
                       {"data", std::vector<double>(p.begin() + static_cast<std::ptrdiff_t>(t.offset),
                                                    p.begin() + static_cast<std::ptrdiff_t>(t.offset + t.size()))}});
  }
  j["tensors"] = std::move(tensors);
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write model file " + path.string());
  f << j.dump() << '\n';
}

LstmModel load_model(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot open model file " + path.string());
  json j;
  try {
    j = json::parse(f);
    if (j.at("format") != "entrylab-lstm") throw IngestError("not an entrylab model: " + path.string());
    if (j.at("version").get<int>() != kModelFormatVersion) {
      throw IngestError("unsupported model version in " + path.string());
    }
    const auto& ja = j.at("architecture");
    Architecture a;
    a.inputs = ja.at("inputs").get<std::size_t>();
    a.hidden = ja.at("hidden").get<std::size_t>();
    a.outputs = ja.at("outputs").get<std::size_t>();
    a.layers = ja.at("layers").get<std::size_t>();
    a.dropout = ja.at("dropout").get<double>();
    a.activation = parse_activation(ja.at("hidden_activation").get<std::string>());
    LstmModel model(a);
    model.seed = j.at("seed").get<std::uint64_t>();
    const auto& n = j.at("normalization");
    model.norm.feature_mean = n.at("feature_mean").get<std::vector<double>>();
    model.norm.feature_std = n.at("feature_std").get<std::vector<double>>();
    model.norm.target_mean = n.at("target_mean").get<std::vector<double>>();
    model.norm.target_std = n.at("target_std").get<std::vector<double>>();
    const auto& jt = j.at("tensors");
    if (jt.size() != model.tensors().size()) throw IngestError("tensor count mismatch in " + path.string());
    auto params = model.params();
    for (std::size_t k = 0; k < jt.size(); ++k) {
      const auto& spec = model.tensors()[k];
      const auto data = jt[k].at("data").get<std::vector<double>>();
      if (jt[k].at("name") != spec.name || jt[k].at("rows").get<std::size_t>() != spec.rows ||
          jt[k].at("cols").get<std::size_t>() != spec.cols || data.size() != spec.size()) {
        throw IngestError("tensor " + spec.name + " has the wrong shape in " + path.string());
      }
      std::copy(data.begin(), data.end(), params.begin() + static_cast<std::ptrdiff_t>(spec.offset));
    }
    return model;
  } catch (const json::exception& e) {
    throw IngestError("malformed model file " + path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw IngestError("malformed model file " + path.string() + ": " + e.what());
  }
}

}  // namespace entrylab::neural
