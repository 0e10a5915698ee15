#include "entrylab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "entrylab/errors.hpp"

namespace entrylab::estimators {

Kind parse_kind(std::string_view name) {
  if (name == "exponential") return Kind::exponential;
  if (name == "filter") return Kind::filter;
  if (name == "lstm") return Kind::lstm;
  if (name == "truth") return Kind::truth;
  throw ConfigError("unknown estimator '" + std::string(name) + "' (exponential | filter | lstm | truth)");
}

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::exponential: return "exponential";
    case Kind::filter: return "filter";
    case Kind::lstm: return "lstm";
    case Kind::truth: return "truth";
  }
  return "?";
}

double ExponentialEstimator::density_at(double h_km) const {
  return atmos::exp_density(model_, std::max(h_km, 0.0));
}

bool FadingMemoryFilter::update(double ls, double ds, double le, double de) {
  if (!(le > 0.0) || !(de > 0.0) || !(ls > 0.0) || !(ds > 0.0)) return false;
  lift_ratio += (1.0 - beta) * (ls / le - lift_ratio);
  drag_ratio += (1.0 - beta) * (ds / de - drag_ratio);
  return true;
}

FilterEstimator::FilterEstimator(const atmos::ExponentialModel& model, const dynamics::VehicleParams& vehicle,
                                 const dynamics::PlanetModel& planet, double beta)
    : exponential_(model), model_(model), vehicle_(vehicle), planet_(planet) {
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("filter beta must lie in (0, 1)");
  filter_.beta = beta;
}

void FilterEstimator::observe(const Measurement& m) {
  const double h_km = (m.nav.r - planet_.radius) / 1000.0;
  const auto expected = dynamics::aero_magnitudes(m.nav.v, exponential_.density_at(h_km), vehicle_);
  filter_.update(m.lift, m.drag, expected.lift, expected.drag);
}

atmos::PseudodensityProfile decode_output(const neural::Normalization& norm, std::span<const double> y) {
  if (y.size() != atmos::kGridNodes || norm.target_mean.size() != atmos::kGridNodes) {
    throw ConfigError("network output width does not match the prediction grid");
  }
  atmos::PseudodensityProfile p;
  for (std::size_t j = 0; j < atmos::kGridNodes; ++j) {
    p.eta[j] = std::max(0.0, y[j] * norm.target_std[j] + norm.target_mean[j]);
  }
  return p;
}

LstmEstimator::LstmEstimator(std::shared_ptr<const neural::LstmModel> model,
                             const atmos::ExponentialModel& fallback)
    : model_(model ? std::move(model) : throw ConfigError("LSTM estimator needs a model")),
      state_(*model_),
      fallback_(fallback) {
  const auto& n = model_->norm;
  const auto& a = model_->arch();
  if (n.empty() || n.feature_mean.size() != a.inputs || n.target_mean.size() != a.outputs) {
    throw ConfigError("LSTM model has no normalization statistics");
  }
  if (a.inputs != kFeatureCount || a.outputs != atmos::kGridNodes) {
    throw ConfigError("LSTM model dimensions do not match the feature vector and grid");
  }
  x_.resize(a.inputs);
  y_.resize(a.outputs);
}

void LstmEstimator::observe(const Measurement& m) {
  const auto& n = model_->norm;
  for (std::size_t j = 0; j < kFeatureCount; ++j) x_[j] = (m.features[j] - n.feature_mean[j]) / n.feature_std[j];
  state_.step(x_, y_);
  eta_ = decode_output(n, y_);
  grid_ = atmos::GridDensity(atmos::from_pseudodensity(eta_));
  ++steps_;
}

double LstmEstimator::density_at(double h_km) const {
  return steps_ == 0 ? fallback_.density_at(h_km) : grid_(h_km);
}

std::unique_ptr<DensityEstimator> make_estimator(Kind kind, const EstimatorContext& ctx) {
  switch (kind) {
    case Kind::exponential: return std::make_unique<ExponentialEstimator>(ctx.exponential);
    case Kind::filter:
      return std::make_unique<FilterEstimator>(ctx.exponential, ctx.vehicle, ctx.planet, ctx.filter_beta);
    case Kind::lstm:
      if (!ctx.model) throw ConfigError("the lstm estimator needs a trained model");
      return std::make_unique<LstmEstimator>(ctx.model, ctx.exponential);
    case Kind::truth:
      if (!ctx.truth) throw ConfigError("the truth estimator needs the truth profile");
      return std::make_unique<TruthEstimator>(ctx.truth);
  }
  throw ConfigError("unknown estimator kind");
}

}  // namespace entrylab::estimators
