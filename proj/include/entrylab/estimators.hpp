#pragma once

// Concrete density estimators for the guidance predictor.

#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "entrylab/atmos.hpp"
#include "entrylab/density_estimator.hpp"
#include "entrylab/lstm.hpp"

namespace entrylab::estimators {

enum class Kind { exponential, filter, lstm, truth };

/// Accepts exponential | filter | lstm | truth.
Kind parse_kind(std::string_view name);
std::string_view kind_name(Kind kind);

class ExponentialEstimator : public DensityEstimator {
 public:
  explicit ExponentialEstimator(const atmos::ExponentialModel& model = {}) : model_(model) {}
  double density_at(double h_km) const override;
  std::string_view name() const override { return "exponential"; }

 private:
  atmos::ExponentialModel model_;
};

/// First-order fading-memory recursion on the sensed/expected lift and drag
/// ratios: x <- x + (1 - beta)(ratio - x).
struct FadingMemoryFilter {
  double beta = 0.9;
  double lift_ratio = 1.0;
  double drag_ratio = 1.0;

  /// Skips the update (returns false) when an expected or sensed value is not
  /// positive.
  bool update(double lift_sensed, double drag_sensed, double lift_expected, double drag_expected);
};

/// Exponential density with the predicted lift and drag scaled by the
/// filtered ratios. The expected accelerations are the exponential model's
/// at the sensed altitude and speed.
class FilterEstimator : public DensityEstimator {
 public:
  FilterEstimator(const atmos::ExponentialModel& model, const dynamics::VehicleParams& vehicle,
                  const dynamics::PlanetModel& planet, double beta = 0.9);

  double density_at(double h_km) const override { return exponential_.density_at(h_km); }
  double lift_scale() const override { return filter_.lift_ratio; }
  double drag_scale() const override { return filter_.drag_ratio; }
  void observe(const Measurement& m) override;
  std::string_view name() const override { return "filter"; }

  const FadingMemoryFilter& filter() const { return filter_; }

 private:
  ExponentialEstimator exponential_;
  atmos::ExponentialModel model_;
  dynamics::VehicleParams vehicle_;
  dynamics::PlanetModel planet_;
  FadingMemoryFilter filter_;
};

/// Runs the network one step per observation (the recurrent state carries the
/// history, which equals re-running the whole prefix) and serves the latest
/// predicted profile by log-linear interpolation on the prediction grid.
/// Before the first observation it answers with the fallback exponential law.
class LstmEstimator : public DensityEstimator {
 public:
  /// Throws ConfigError when the model carries no normalization statistics.
  explicit LstmEstimator(std::shared_ptr<const neural::LstmModel> model,
                         const atmos::ExponentialModel& fallback = {});

  double density_at(double h_km) const override;
  void observe(const Measurement& m) override;
  std::string_view name() const override { return "lstm"; }

  bool has_prediction() const { return steps_ > 0; }
  const atmos::PseudodensityProfile& pseudodensity() const { return eta_; }
  std::size_t steps() const { return steps_; }

 private:
  std::shared_ptr<const neural::LstmModel> model_;
  neural::InferenceState state_;
  ExponentialEstimator fallback_;
  atmos::PseudodensityProfile eta_;
  atmos::GridDensity grid_;
  std::vector<double> x_, y_;
  std::size_t steps_ = 0;
};

/// Converts raw network outputs (normalized pseudodensity) to a profile:
/// denormalize, clamp at zero.
atmos::PseudodensityProfile decode_output(const neural::Normalization& norm, std::span<const double> y);

/// Oracle that knows the truth profile.
class TruthEstimator : public DensityEstimator {
 public:
  explicit TruthEstimator(std::shared_ptr<const atmos::AtmosphereProfile> profile)
      : profile_(std::move(profile)) {}
  double density_at(double h_km) const override { return profile_->density_at(h_km); }
  std::string_view name() const override { return "truth"; }

 private:
  std::shared_ptr<const atmos::AtmosphereProfile> profile_;
};

struct EstimatorContext {
  atmos::ExponentialModel exponential;
  dynamics::VehicleParams vehicle;
  dynamics::PlanetModel planet;
  double filter_beta = 0.9;
  std::shared_ptr<const neural::LstmModel> model;             // lstm
  std::shared_ptr<const atmos::AtmosphereProfile> truth;      // truth
};

/// Throws ConfigError when the kind needs a model or profile that is missing.
std::unique_ptr<DensityEstimator> make_estimator(Kind kind, const EstimatorContext& ctx);

}  // namespace entrylab::estimators
