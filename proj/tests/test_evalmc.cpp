#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"

#include "entrylab/config.hpp"
#include "entrylab/errors.hpp"
#include "entrylab/evalmc.hpp"

using namespace entrylab;
using namespace entrylab::evalmc;

namespace {

CaseRecord record(double km) {
  CaseRecord c;
  c.ok = true;
  c.s_f_km = km;
  return c;
}

neural::LstmModel constant_model(const atmos::NodeValues& eta) {
  neural::LstmModel m{neural::Architecture{}};
  m.initialize(4);
  auto p = m.params();
  for (std::size_t t : {std::size_t{6}, std::size_t{7}}) {
    const auto& s = m.tensors()[t];
    std::fill(p.begin() + static_cast<std::ptrdiff_t>(s.offset),
              p.begin() + static_cast<std::ptrdiff_t>(s.offset + s.size()), 0.0);
  }
  m.norm.feature_mean.assign(kFeatureCount, 0.0);
  m.norm.feature_std.assign(kFeatureCount, 1.0);
  m.norm.target_mean.assign(eta.begin(), eta.end());
  m.norm.target_std.assign(atmos::kGridNodes, 1.0);
  return m;
}

std::vector<pipeline::TrajectorySample> test_samples(const atmos::PseudodensityProfile& target) {
  std::vector<pipeline::TrajectorySample> out;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  for (std::size_t len : {3u, 8u, 5u}) {
    pipeline::TrajectorySample s;
    for (std::size_t t = 0; t < len; ++t) {
      FeatureVector f;
      for (auto& v : f) v = n(rng);
      s.features.push_back(f);
    }
    s.target = target;
    out.push_back(s);
  }
  return out;
}

const config::RunConfig& desk() {
  static const auto c = config::defaults(config::Scale::desk);
  return c;
}

}  // namespace

TEST_CASE("noise injection") {
  const double g0 = dynamics::PlanetModel{}.g0();
  const FeatureVector x{3400e3, 1.6, 0.8, 3500.0, -0.1, 0.4, 1.0, -2.0, 3.0, 2.5};
  std::mt19937_64 rng(1);
  CHECK(inject_noise(x, NoiseSpec::zero(), g0, rng) == x);

  const NoiseSpec spec;
  const std::size_t n = 100000;
  double sr = 0.0, sa = 0.0, mr = 0.0;
  double sp = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto y = inject_noise(x, spec, g0, rng);
    mr += y[0] - x[0];
    sr += (y[0] - x[0]) * (y[0] - x[0]);
    sa += (y[6] - x[6]) * (y[6] - x[6]);
    const double ratio = std::pow(10.0, y[9] - x[9]) - 1.0;
    sp += ratio * ratio;
  }
  CHECK(std::abs(mr / n) < 0.02);
  CHECK(std::sqrt(sr / n) == doctest::Approx(5.0 / 3.0).epsilon(0.03));
  CHECK(std::sqrt(sa / n) == doctest::Approx(1e-7 * g0 / 3.0).epsilon(0.03));
  CHECK(std::sqrt(sp / n) == doctest::Approx(0.01 / 3.0).epsilon(0.03));

  NoiseSpec bad;
  bad.v = -1.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("percentiles") {
  const std::vector<double> v{5.0, 1.0, 4.0, 2.0, 3.0};
  CHECK(percentile(v, 0.0) == 1.0);
  CHECK(percentile(v, 50.0) == 3.0);
  CHECK(percentile(v, 100.0) == 5.0);
  CHECK(percentile(v, 1.0) == doctest::Approx(1.04));
  CHECK(percentile(v, 99.0) == doctest::Approx(4.96));
  CHECK(percentile(v, 37.5) == doctest::Approx(2.5));
  CHECK_THROWS_AS(percentile({}, 50.0), DomainError);
}

TEST_CASE("summary statistics") {
  const auto one = summarize({record(-1.0)});
  CHECK(one.mean_km == 1.0);
  CHECK(one.std_km == 0.0);
  CHECK(one.p1_km == 1.0);
  CHECK(one.p99_km == 1.0);
  CHECK(one.mean_signed_km == -1.0);

  auto failed = record(100.0);
  failed.ok = false;
  const auto sym = summarize({record(-2.0), record(2.0), record(-1.0), record(1.0), failed});
  CHECK(sym.cases == 4);
  CHECK(sym.failures == 1);
  CHECK(sym.mean_signed_km == 0.0);
  CHECK(sym.mean_km == 1.5);
  CHECK(sym.std_km == 0.5);

  CHECK_THROWS_AS(summarize({failed}), DomainError);
  CHECK(density_error_percent(1.01, 1.0) == doctest::Approx(1.0));
  CHECK(compare({one, sym}).find("mean") != std::string::npos);
}

TEST_CASE("campaigns") {
  auto setup = config::case_setup(desk(), estimators::Kind::exponential, false);
  const auto a = run_campaign(setup, 1, 5, 1);
  const auto b = run_campaign(setup, 1, 5, 1);
  REQUIRE(a.cases.size() == 1);
  REQUIRE(a.cases[0].ok);
  CHECK(a.cases[0].s_f_km == b.cases[0].s_f_km);
  CHECK(a.cases[0].seed == pipeline::case_seed(5, 0));
  CHECK(a.cases[0].s_f_km == doctest::Approx(a.cases[0].s_f_deg * dynamics::kDeg * 3396.2).epsilon(1e-12));
  CHECK(a.cases[0].undershoot == (a.cases[0].s_f_km > 0.0));

  // The onboard exponential model does not read measurements, so noise cannot move it.
  auto noisy_setup = config::case_setup(desk(), estimators::Kind::exponential, true);
  REQUIRE(noisy_setup.noise.has_value());
  const auto noisy = run_campaign(noisy_setup, 2, 5, 1);
  const auto clean = run_campaign(setup, 2, 5, 1);
  for (std::size_t i = 0; i < 2; ++i) CHECK(noisy.cases[i].s_f_km == clean.cases[i].s_f_km);

  const auto dir = std::filesystem::temp_directory_path() / "entrylab_campaign_test";
  std::filesystem::create_directories(dir);
  write_results_csv(dir / "results.csv", clean);
  write_summary_json(dir / "summary.json", {clean.summary});
  write_histogram_csv(dir / "histogram.csv", clean);
  std::ifstream f(dir / "results.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "case_id,seed,s_f_deg,s_f_km,undershoot_flag");
  std::vector<CaseRecord> parsed;
  while (std::getline(f, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() == 5);
    parsed.push_back(record(std::stod(cells[3])));
  }
  const auto again = summarize(parsed);
  CHECK(again.mean_km == clean.summary.mean_km);
  CHECK(again.std_km == clean.summary.std_km);
  CHECK(again.p99_km == clean.summary.p99_km);
  std::filesystem::remove_all(dir);
}

TEST_CASE("density error map") {
  const atmos::AtmoSample sample;
  const auto truth = atmos::generate_profile(sample, atmos::GasModel{}, atmos::SurrogateConfig{});
  const auto target = atmos::to_pseudodensity(truth);
  const auto tests = test_samples(target);

  const auto exact = density_error_map(constant_model(target.eta), tests);
  CHECK(exact.mean.size() == 8);
  CHECK(exact.counts[0] == 3);
  CHECK(exact.counts[4] == 2);
  CHECK(exact.counts[7] == 1);
  CHECK(exact.full_length < 1e-10);
  for (const auto& row : exact.mean) {
    for (double v : row) CHECK(v < 1e-10);
  }

  auto rho = atmos::from_pseudodensity(target);
  for (auto& r : rho) r *= 1.01;
  const auto off = density_error_map(constant_model(atmos::to_pseudodensity(rho).eta), tests);
  CHECK(off.full_length == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(off.first_step == doctest::Approx(1.0).epsilon(1e-9));
  for (double q : off.quartiles) CHECK(q == doctest::Approx(1.0).epsilon(1e-9));
  for (double v : off.mean[6]) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));

  CHECK_THROWS_AS(density_error_map(constant_model(target.eta), {}), DomainError);
}
