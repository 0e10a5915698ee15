#include "entrylab/evalmc.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "entrylab/errors.hpp"
#include "entrylab/estimators.hpp"
#include "entrylab/parallel.hpp"

namespace entrylab::evalmc {

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw DomainError("percentile of an empty set");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile outside [0, 100]");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<CaseRecord>& cases, const std::string& estimator, bool noise) {
  Summary s;
  s.estimator = estimator;
  s.noise = noise;
  std::vector<double> mag;
  double signed_sum = 0.0;
  for (const auto& c : cases) {
    if (!c.ok) {
      ++s.failures;
      continue;
    }
    mag.push_back(std::abs(c.s_f_km));
    signed_sum += c.s_f_km;
  }
  s.cases = mag.size();
  if (mag.empty()) throw DomainError("no successful cases to summarize");
  const double n = static_cast<double>(mag.size());
  s.mean_km = std::accumulate(mag.begin(), mag.end(), 0.0) / n;
  double var = 0.0;
  for (double m : mag) var += (m - s.mean_km) * (m - s.mean_km);
  s.std_km = std::sqrt(var / n);
  s.p1_km = percentile(mag, 1.0);
  s.p99_km = percentile(mag, 99.0);
  s.mean_signed_km = signed_sum / n;
  return s;
}

CampaignResult run_campaign(const pipeline::CaseSetup& setup, std::size_t count, std::uint64_t master_seed,
                            int jobs) {
  CampaignResult out;
  out.estimator = std::string(estimators::kind_name(setup.estimator));
  out.noise = setup.noise.has_value();
  out.cases.resize(count);
  const double radius_km = setup.sim.planet.radius / 1000.0;
  parallel_for(count, jobs, [&](std::size_t i) {
    const auto seed = pipeline::case_seed(master_seed, i);
    auto o = pipeline::run_case(setup, seed);
    auto& c = out.cases[i];
    c.case_id = i;
    c.seed = seed;
    c.ok = o.result.ok;
    c.failure = o.result.failure;
    if (c.ok) {
      c.s_f_deg = o.result.range_to_go / dynamics::kDeg;
      c.s_f_km = o.result.range_to_go * radius_km;
      c.undershoot = o.result.range_to_go > 0.0;
    }
  });
  if (std::any_of(out.cases.begin(), out.cases.end(), [](const CaseRecord& c) { return c.ok; })) {
    out.summary = summarize(out.cases, out.estimator, out.noise);
  } else {
    out.summary.estimator = out.estimator;
    out.summary.noise = out.noise;
    out.summary.failures = count;
  }
  return out;
}

std::string compare(const std::vector<Summary>& rows) {
  std::ostringstream os;
  os << std::left << std::setw(13) << "estimator" << std::setw(7) << "noise" << std::right << std::setw(7)
     << "cases" << std::setw(10) << "mean km" << std::setw(10) << "std km" << std::setw(10) << "p1 km"
     << std::setw(10) << "p99 km" << '\n';
  os << std::fixed << std::setprecision(3);
  for (const auto& r : rows) {
    os << std::left << std::setw(13) << r.estimator << std::setw(7) << (r.noise ? "on" : "off") << std::right
       << std::setw(7) << r.cases << std::setw(10) << r.mean_km << std::setw(10) << r.std_km << std::setw(10)
       << r.p1_km << std::setw(10) << r.p99_km << '\n';
  }
  return os.str();
}

void write_results_csv(const std::filesystem::path& path, const CampaignResult& result) {
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17);
  f << "case_id,seed,s_f_deg,s_f_km,undershoot_flag\n";
  for (const auto& c : result.cases) {
    if (!c.ok) continue;
    f << c.case_id << ',' << c.seed << ',' << c.s_f_deg << ',' << c.s_f_km << ',' << (c.undershoot ? 1 : 0) << '\n';
  }
}

void write_summary_json(const std::filesystem::path& path, const std::vector<Summary>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"estimator", r.estimator},
                 {"noise", r.noise},
                 {"cases", r.cases},
                 {"failures", r.failures},
                 {"mean_km", r.mean_km},
                 {"std_km", r.std_km},
                 {"p1_km", r.p1_km},
                 {"p99_km", r.p99_km},
                 {"mean_signed_km", r.mean_signed_km}});
  }
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << j.dump(2) << '\n';
}

void write_histogram_csv(const std::filesystem::path& path, const CampaignResult& result, double bin_km) {
  if (!(bin_km > 0.0)) throw DomainError("histogram bin width must be positive");
  std::map<long long, std::size_t> bins;
  for (const auto& c : result.cases) {
    if (c.ok) ++bins[static_cast<long long>(std::floor(c.s_f_km / bin_km))];
  }
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17);
  f << "bin_lo_km,bin_hi_km,count\n";
  for (const auto& [k, n] : bins) {
    f << static_cast<double>(k) * bin_km << ',' << static_cast<double>(k + 1) * bin_km << ',' << n << '\n';
  }
}

double density_error_percent(double estimate, double truth) {
  if (!(truth > 0.0)) throw DomainError("reference density must be positive");
  return 100.0 * std::abs((estimate - truth) / truth);
}

DensityErrorMap density_error_map(const neural::LstmModel& model,
                                  const std::vector<pipeline::TrajectorySample>& test) {
  if (test.empty()) throw DomainError("density error map needs a non-empty test set");
  const auto& norm = model.norm;
  if (norm.empty()) throw ConfigError("model carries no normalization statistics");
  std::size_t longest = 0;
  for (const auto& s : test) longest = std::max(longest, s.features.size());

  DensityErrorMap map;
  map.mean.assign(longest, atmos::NodeValues{});
  map.counts.assign(longest, 0);
  const double K = static_cast<double>(test.size());
  std::vector<double> y(model.arch().outputs);
  for (const auto& s : test) {
    const std::size_t N = s.features.size();
    const auto truth = atmos::from_pseudodensity(s.target);
    std::vector<double> node_mean(N);
    neural::InferenceState state(model);
    for (std::size_t t = 0; t < N; ++t) {
      const auto x = pipeline::normalize_features(s.features[t], norm);
      state.step(x, y);
      const auto est = atmos::from_pseudodensity(estimators::decode_output(norm, y));
      double sum = 0.0;
      for (std::size_t j = 0; j < atmos::kGridNodes; ++j) {
        const double e = density_error_percent(est[j], truth[j]);
        map.mean[t][j] += e;
        sum += e;
      }
      ++map.counts[t];
      node_mean[t] = sum / static_cast<double>(atmos::kGridNodes);
    }
    map.full_length += node_mean[N - 1] / K;
    map.first_step += node_mean[0] / K;
    for (std::size_t q = 0; q < 4; ++q) {
      const std::size_t len = std::max<std::size_t>(1, ((q + 1) * N + 3) / 4);
      map.quartiles[q] += node_mean[len - 1] / K;
    }
  }
  for (std::size_t t = 0; t < longest; ++t) {
    for (auto& v : map.mean[t]) v /= static_cast<double>(map.counts[t]);
  }
  return map;
}

void write_error_map_csv(const std::filesystem::path& path, const DensityErrorMap& map) {
  std::ofstream f(path);
  if (!f) throw IngestError("cannot write " + path.string());
  f << std::setprecision(17);
  f << "sequence_length,count";
  for (double h : atmos::prediction_grid()) f << ",h" << static_cast<int>(h) << "km";
  f << '\n';
  for (std::size_t t = 0; t < map.mean.size(); ++t) {
    f << t + 1 << ',' << map.counts[t];
    for (double v : map.mean[t]) f << ',' << v;
    f << '\n';
  }
}

}  // namespace entrylab::evalmc
