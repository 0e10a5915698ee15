#include "entrylab/dataset_io.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "entrylab/errors.hpp"

namespace entrylab::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

static_assert(std::endian::native == std::endian::little, "dataset records are little-endian");

namespace {
constexpr std::size_t kHeader = 7;

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

bool get_u64(std::istream& is, std::uint64_t& v) {
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  return static_cast<std::size_t>(is.gcount()) == sizeof v;
}

std::size_t as_count(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e12) throw IngestError(std::string("corrupt record: bad ") + what);
  return static_cast<std::size_t>(v);
}
}  // namespace

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k, h >>= 4) out[static_cast<std::size_t>(k)] = digits[h & 0xF];
  return out;
}

void write_norm_stats(const fs::path& path, const NormalizationStats& s) {
  ordered_json j{{"feature_mean", s.feature_mean},
                 {"feature_std", s.feature_std},
                 {"target_mean", s.target_mean},
                 {"target_std", s.target_std}};
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

NormalizationStats read_norm_stats(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IngestError("cannot open " + path.string());
  try {
    const json j = json::parse(f);
    NormalizationStats s;
    s.feature_mean = j.at("feature_mean").get<std::vector<double>>();
    s.feature_std = j.at("feature_std").get<std::vector<double>>();
    s.target_mean = j.at("target_mean").get<std::vector<double>>();
    s.target_std = j.at("target_std").get<std::vector<double>>();
    return s;
  } catch (const json::exception& e) {
    throw IngestError("malformed statistics file " + path.string() + ": " + e.what());
  }
}

void write_dataset(const fs::path& dir, const Dataset& data, DatasetManifest m) {
  fs::create_directories(dir);
  m.samples = data.samples.size();
  m.failures = data.failures;
  {
    std::ofstream f(dir / "records.bin", std::ios::binary);
    if (!f) throw IngestError("cannot write " + (dir / "records.bin").string());
    std::vector<double> buf;
    for (const auto& s : data.samples) {
      const std::size_t N = s.features.size();
      buf.clear();
      buf.push_back(static_cast<double>(N));
      buf.push_back(s.atmosphere.dust_level);
      buf.push_back(s.atmosphere.wave_offset);
      buf.push_back(static_cast<double>(s.atmosphere.seed));
      buf.push_back(s.atmosphere.perturbation_scale);
      buf.push_back(s.range_to_go);
      buf.push_back(s.final_altitude_km);
      buf.insert(buf.end(), s.target.eta.begin(), s.target.eta.end());
      buf.insert(buf.end(), s.times.begin(), s.times.end());
      for (const auto& x : s.features) buf.insert(buf.end(), x.begin(), x.end());
      put_u64(f, s.case_seed);
      put_u64(f, buf.size());
      f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(double)));
    }
  }
  ordered_json j;
  j["format"] = "entrylab-dataset";
  j["version"] = 1;
  j["estimator"] = m.estimator;
  j["noise"] = m.noise;
  j["master_seed"] = m.master_seed;
  j["requested"] = m.requested;
  j["samples"] = m.samples;
  j["failures"] = m.failures;
  j["failure_reasons"] = data.failure_reasons;
  j["config_hash"] = m.config_hash;
  j["records"] = "records.bin";
  j["norm_stats"] = "norm_stats.json";
  {
    std::ofstream f(dir / "manifest.json");
    if (!f) throw IngestError("cannot write " + (dir / "manifest.json").string());
    f << j.dump(2) << '\n';
  }
  if (!data.samples.empty()) write_norm_stats(dir / "norm_stats.json", compute_norm_stats(data.samples));
}

Dataset read_dataset(const fs::path& dir, DatasetManifest* manifest) {
  DatasetManifest m;
  {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw IngestError("dataset manifest not found in " + dir.string());
    try {
      const json j = json::parse(f);
      if (j.at("format") != "entrylab-dataset") throw IngestError("not a dataset directory: " + dir.string());
      m.estimator = j.at("estimator").get<std::string>();
      m.noise = j.at("noise").get<bool>();
      m.master_seed = j.at("master_seed").get<std::uint64_t>();
      m.requested = j.at("requested").get<std::size_t>();
      m.samples = j.at("samples").get<std::size_t>();
      m.failures = j.at("failures").get<std::size_t>();
      m.config_hash = j.at("config_hash").get<std::string>();
    } catch (const json::exception& e) {
      throw IngestError("malformed dataset manifest in " + dir.string() + ": " + e.what());
    }
  }
  std::ifstream f(dir / "records.bin", std::ios::binary);
  if (!f) throw IngestError("records.bin missing in " + dir.string());
  Dataset d;
  d.failures = m.failures;
  std::uint64_t seed = 0, len = 0;
  std::vector<double> buf;
  while (get_u64(f, seed)) {
    if (!get_u64(f, len) || len < kHeader + atmos::kGridNodes || len > (1ULL << 32)) {
      throw IngestError("corrupt record header in " + dir.string());
    }
    buf.resize(len);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len * sizeof(double)));
    if (static_cast<std::uint64_t>(f.gcount()) != len * sizeof(double)) {
      throw IngestError("truncated record in " + dir.string());
    }
    const std::size_t N = as_count(buf[0], "sequence length");
    if (N == 0 || len != kHeader + atmos::kGridNodes + N * (1 + kFeatureCount)) {
      throw IngestError("record length does not match its sequence length in " + dir.string());
    }
    TrajectorySample s;
    s.case_seed = seed;
    s.atmosphere.dust_level = buf[1];
    s.atmosphere.wave_offset = buf[2];
    s.atmosphere.seed = as_count(buf[3], "atmosphere seed");
    s.atmosphere.perturbation_scale = buf[4];
    s.range_to_go = buf[5];
    s.final_altitude_km = buf[6];
    std::size_t at = kHeader;
    for (std::size_t j = 0; j < atmos::kGridNodes; ++j) s.target.eta[j] = buf[at++];
    s.times.assign(buf.begin() + static_cast<std::ptrdiff_t>(at), buf.begin() + static_cast<std::ptrdiff_t>(at + N));
    at += N;
    s.features.resize(N);
    for (auto& x : s.features) {
      for (auto& v : x) v = buf[at++];
    }
    d.samples.push_back(std::move(s));
  }
  if (d.samples.size() != m.samples) throw IngestError("record count disagrees with the manifest in " + dir.string());
  if (manifest) *manifest = m;
  return d;
}

}  // namespace entrylab::pipeline
