#include <cmath>
#include <memory>

#include "doctest.h"
#include "support.hpp"

#include "entrylab/errors.hpp"
#include "entrylab/estimators.hpp"
#include "entrylab/fnpeg.hpp"
#include "entrylab/simulation.hpp"

using namespace entrylab;
using namespace entrylab::estimators;
using testing::rel_err;

namespace {

std::shared_ptr<neural::LstmModel> model_emitting(const atmos::NodeValues& eta) {
  auto m = std::make_shared<neural::LstmModel>(neural::Architecture{});
  m->initialize(9);
  auto p = m->params();
  const auto& dense_w = m->tensors()[2 * 3];
  const auto& dense_b = m->tensors()[2 * 3 + 1];
  std::fill(p.begin() + static_cast<std::ptrdiff_t>(dense_w.offset),
            p.begin() + static_cast<std::ptrdiff_t>(dense_w.offset + dense_w.size()), 0.0);
  std::fill(p.begin() + static_cast<std::ptrdiff_t>(dense_b.offset),
            p.begin() + static_cast<std::ptrdiff_t>(dense_b.offset + dense_b.size()), 0.0);
  m->norm.feature_mean.assign(kFeatureCount, 0.0);
  m->norm.feature_std.assign(kFeatureCount, 1.0);
  m->norm.target_mean.assign(eta.begin(), eta.end());
  m->norm.target_std.assign(atmos::kGridNodes, 1.0);
  return m;
}

Measurement measurement_at(double h_km, double speed, double lift, double drag) {
  const dynamics::PlanetModel planet;
  Measurement m;
  m.nav = {planet.radius + h_km * 1000.0, 1.6, 0.8, speed, -0.1, 0.5};
  m.lift = lift;
  m.drag = drag;
  m.features = {m.nav.r, m.nav.lon, m.nav.lat, m.nav.v, m.nav.fpa, m.nav.heading, 0.1, -0.2, 0.3, 3.0};
  return m;
}

}  // namespace

TEST_CASE("kind names") {
  CHECK(parse_kind("exponential") == Kind::exponential);
  CHECK(parse_kind("filter") == Kind::filter);
  CHECK(parse_kind("lstm") == Kind::lstm);
  CHECK(kind_name(Kind::filter) == "filter");
  CHECK_THROWS_AS(parse_kind("marsgram"), ConfigError);
}

TEST_CASE("exponential estimator") {
  const ExponentialEstimator e;
  CHECK(e.density_at(0.0) == 2.63e-2);
  CHECK(rel_err(e.density_at(10.15), 2.63e-2 / std::exp(1.0)) < 1e-15);
  CHECK(e.density_at(130.0) < 1e-7);
  CHECK(e.lift_scale() == 1.0);
  CHECK(e.drag_scale() == 1.0);
}

TEST_CASE("fading-memory recursion") {
  FadingMemoryFilter f;
  f.update(1.0, 1.0, 1.0, 1.0);
  CHECK(f.lift_ratio == 1.0);
  CHECK(f.drag_ratio == 1.0);
  f.update(2.0, 2.0, 1.0, 1.0);
  CHECK(f.lift_ratio == doctest::Approx(1.1).epsilon(1e-15));

  FadingMemoryFilter g;
  const double k = 1.5;
  double prev = std::abs(g.lift_ratio - k);
  for (int n = 1; n <= 50; ++n) {
    g.update(k, k, 1.0, 1.0);
    const double err = std::abs(g.lift_ratio - k);
    CHECK(rel_err(err, 0.9 * prev) < 1e-12);
    CHECK(rel_err(err, std::abs(1.0 - k) * std::pow(0.9, n)) < 1e-12);
    prev = err;
  }
  CHECK(std::abs(g.lift_ratio - k) < 1e-2 * std::abs(1.0 - k));

  FadingMemoryFilter h;
  CHECK_FALSE(h.update(1.0, 1.0, 0.0, 1.0));
  CHECK(h.lift_ratio == 1.0);
}

TEST_CASE("filter estimator") {
  const atmos::ExponentialModel model;
  const dynamics::VehicleParams veh;
  const dynamics::PlanetModel planet;
  FilterEstimator f(model, veh, planet, 0.9);
  const ExponentialEstimator e(model);
  CHECK(f.density_at(33.0) == e.density_at(33.0));
  CHECK(f.lift_scale() == 1.0);
  CHECK(f.drag_scale() == 1.0);

  // Unit ratios reproduce the exponential predictor exactly.
  const Mission mission;
  const fnpeg::Scales sc(planet);
  const auto target = fnpeg::GuidanceTarget::from_mission(mission, planet);
  fnpeg::PredictorInputs in;
  in.target_energy = fnpeg::energy(target.radius / planet.radius, target.speed / sc.speed);
  in.target_range = target.range;
  const fnpeg::LongitudinalState start{(planet.radius + 65e3) / planet.radius, 3800.0 / sc.speed, -0.18, 0.11};
  in.estimator = &f;
  const double zf = fnpeg::predict_range(start, 1.2, in);
  in.estimator = &e;
  CHECK(zf == fnpeg::predict_range(start, 1.2, in));

  // Sensed accelerations 30 % above the exponential expectation.
  const double h = 40.0, v = 3000.0;
  const auto expected = dynamics::aero_magnitudes(v, atmos::exp_density(model, h), veh);
  for (int n = 0; n < 100; ++n) f.observe(measurement_at(h, v, 1.3 * expected.lift, 1.3 * expected.drag));
  CHECK(f.lift_scale() == doctest::Approx(1.3).epsilon(1e-4));
  CHECK(f.drag_scale() == doctest::Approx(1.3).epsilon(1e-4));
}

TEST_CASE("lstm estimator") {
  const atmos::ExponentialModel exp_model;
  atmos::NodeValues rho;
  const auto& grid = atmos::prediction_grid();
  for (std::size_t j = 0; j < atmos::kGridNodes; ++j) rho[j] = atmos::exp_density(exp_model, grid[j]);
  const auto eta = atmos::to_pseudodensity(rho).eta;
  auto model = model_emitting(eta);

  LstmEstimator est(model);
  CHECK_FALSE(est.has_prediction());
  CHECK(est.density_at(12.0) == atmos::exp_density(exp_model, 12.0));

  est.observe(measurement_at(60.0, 3500.0, 1.0, 5.0));
  REQUIRE(est.has_prediction());
  for (double h = 0.0; h <= 130.0; h += 0.5) {
    const double d = est.density_at(h);
    REQUIRE(std::isfinite(d));
    REQUIRE(d > 0.0);
    CHECK(rel_err(d, atmos::exp_density(exp_model, h)) < 1e-9);
  }
  for (double v : est.pseudodensity().eta) CHECK(v >= 0.0);

  // Deterministic inference: two estimators fed the same sequence agree.
  auto random_model = std::make_shared<neural::LstmModel>(neural::Architecture{});
  random_model->initialize(4);
  random_model->norm = model->norm;
  LstmEstimator a(random_model), b(random_model);
  for (int k = 0; k < 5; ++k) {
    const auto m = measurement_at(70.0 - 5.0 * k, 3800.0 - 100.0 * k, 0.5 + k, 3.0 + k);
    a.observe(m);
    b.observe(m);
  }
  for (std::size_t j = 0; j < atmos::kGridNodes; ++j) CHECK(a.pseudodensity().eta[j] == b.pseudodensity().eta[j]);

  neural::Normalization n;
  n.target_mean.assign(atmos::kGridNodes, 0.0);
  n.target_std.assign(atmos::kGridNodes, 1.0);
  std::vector<double> y(atmos::kGridNodes, -3.0);
  for (double v : decode_output(n, y).eta) CHECK(v == 0.0);
}

TEST_CASE("estimator factory") {
  EstimatorContext ctx;
  CHECK(make_estimator(Kind::exponential, ctx)->name() == "exponential");
  CHECK(make_estimator(Kind::filter, ctx)->name() == "filter");
  CHECK_THROWS_AS(make_estimator(Kind::lstm, ctx), ConfigError);
  CHECK_THROWS_AS(make_estimator(Kind::truth, ctx), ConfigError);
  auto bare = std::make_shared<neural::LstmModel>(neural::Architecture{});
  ctx.model = bare;
  CHECK_THROWS_AS(make_estimator(Kind::lstm, ctx), ConfigError);
}
