#pragma once

// Fully numerical predictor-corrector entry guidance.
//
// Longitudinal channel: the bank magnitude is linear in the energy-like
// variable e = 1/r - V^2/2 (non-dimensional), from sigma0 at the current
// energy to sigma_f at the target energy. The predictor integrates the
// planar non-dimensional dynamics over e; the corrector drives the terminal
// range error z(sigma0) to zero with a step-halving Newton/secant iteration.
//
// Lateral channel: bank reversals keep the heading inside a velocity-dependent
// deadband around the great-circle azimuth to the target.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "entrylab/density_estimator.hpp"
#include "entrylab/dynamics.hpp"
#include "entrylab/mission.hpp"

namespace entrylab::fnpeg {

using dynamics::kDeg;

struct GuidanceConfig {
  double final_bank = 70.0 * kDeg;
  double tolerance = 1e-6;
  double frequency_hz = 1.0;
  double activation_load = 1.47;  // m/s^2
  double deadband_entry = 2.0 * kDeg;
  double deadband_final = 1.5 * kDeg;
  double deadband_entry_speed = 4000.0;  // anchors of the linear deadband, m/s
  double deadband_final_speed = 1214.0;
  double fd_step = 1.0 * kDeg;
  int max_halvings = 20;
  int max_iterations = 20;
  double initial_bank = 45.0 * kDeg;
  int predictor_steps = 200;
};

void validate(const GuidanceConfig& config);

/// Target conditions in guidance units.
struct GuidanceTarget {
  double radius = 0.0;  // m
  double speed = 0.0;   // m/s
  double lon = 0.0;
  double lat = 0.0;
  double range = 0.0;   // rad

  static GuidanceTarget from_mission(const Mission& mission, const dynamics::PlanetModel& planet);
};

/// Length and speed scales for the non-dimensional longitudinal dynamics.
struct Scales {
  double radius;
  double g0;
  double speed;  // sqrt(g0 R)

  explicit Scales(const dynamics::PlanetModel& planet)
      : radius(planet.radius), g0(planet.g0()), speed(std::sqrt(planet.g0() * planet.radius)) {}
};

/// The predictor could not produce a terminal range (energy not monotone,
/// ground impact or non-finite state).
class PredictionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// e = 1/r - V^2/2 in non-dimensional units.
double energy(double r_nd, double v_nd);

/// |sigma(e)|, linear from sigma0 at e0 to sigma_f at e_f. Throws DomainError
/// when e0 == e_f.
double bank_profile(double e, double e0, double ef, double sigma0, double sigmaf);

/// Non-dimensional longitudinal state plus range-to-go (rad).
struct LongitudinalState {
  double r = 1.0;
  double v = 0.0;
  double fpa = 0.0;
  double s = 0.0;
};

struct PredictorInputs {
  const DensityEstimator* estimator = nullptr;
  dynamics::VehicleParams vehicle;
  dynamics::PlanetModel planet;
  double target_energy = 0.0;
  double target_range = 0.0;
  double final_bank = 70.0 * kDeg;
  int steps = 200;
};

/// Integrate from the current energy to the target energy with the linear
/// bank profile and return z = s(e_f) - s_f*. Lift and drag are scaled by the
/// estimator's lift_scale()/drag_scale().
double predict_range(const LongitudinalState& start, double sigma0, const PredictorInputs& in);

/// Full predicted arc (for diagnostics and tests): one entry per energy node.
struct PredictedNode {
  double e;
  LongitudinalState state;
};
std::vector<PredictedNode> predict_arc(const LongitudinalState& start, double sigma0,
                                       const PredictorInputs& in);

// ---------------------------------------------------------------------------
// Corrector

struct CorrectorStep {
  double sigma0;
  double z;
};

struct CorrectorResult {
  double sigma0 = 0.0;
  double z = 0.0;
  double dz = 0.0;  // latest estimate of dz/dsigma0
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  /// Initial point followed by every accepted iterate.
  std::vector<CorrectorStep> history;
};

/// Newton iteration with a finite-difference slope first and secant slopes
/// afterwards; each update is accepted with the largest step 2^-i
/// (i = 0..max_halvings) that strictly decreases |z|. Iterates are clamped to
/// [0, pi]. Stops when |z dz/dsigma0| <= tolerance. If the line search cannot
/// decrease |z| outside tolerance the result is marked stalled and carries the
/// last accepted iterate. Evaluations that throw PredictionFailure count as
/// non-decreasing.
template <class ZFunction>
CorrectorResult correct_bank(ZFunction&& z_of, double sigma_guess, const GuidanceConfig& config);

// ---------------------------------------------------------------------------
// Lateral channel

/// Deadband c1 V + c0 through (V_entry, dPsi_entry) and (V_final, dPsi_final).
double deadband(double speed, const GuidanceConfig& config);

/// Returns the bank sign after applying the deadband test. When
/// |Psi - psi| >= deadband and the current sign turns the vehicle away from
/// the target azimuth, the sign is reversed.
int lateral_channel(double heading, double azimuth, double speed, int sign,
                    const GuidanceConfig& config);

// ---------------------------------------------------------------------------

struct GuidanceCommand {
  double bank = 0.0;       // signed, rad
  double magnitude = 0.0;  // rad
  int sign = 1;
  bool active = false;     // the predictor-corrector ran this cycle
  bool reversal = false;
  double sigma0 = 0.0;
  double z = 0.0;
  double dz = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  bool prediction_failed = false;
  std::vector<CorrectorStep> iterates;  // this cycle's corrector history
};

/// One guidance instance per trajectory.
class Guidance {
 public:
  Guidance(const GuidanceConfig& config, const GuidanceTarget& target,
           const dynamics::VehicleParams& vehicle, const dynamics::PlanetModel& planet);

  /// One guidance cycle. Below the activation load the previous command is
  /// held; otherwise the predictor-corrector and lateral channel run.
  GuidanceCommand step(const dynamics::SphericalState& nav, double sensed_load,
                       const DensityEstimator& estimator);

  const GuidanceCommand& last() const { return last_; }
  int reversals() const { return reversals_; }
  bool engaged() const { return engaged_; }
  double target_energy() const { return target_energy_; }

  /// Signed great-circle range-to-go (rad), positive when the target lies ahead.
  static double signed_range(const dynamics::SphericalState& nav, const GuidanceTarget& target);

 private:
  GuidanceConfig config_;
  GuidanceTarget target_;
  dynamics::VehicleParams vehicle_;
  dynamics::PlanetModel planet_;
  Scales scales_;
  double target_energy_;
  double sigma0_;
  int sign_ = 1;
  bool engaged_ = false;
  int reversals_ = 0;
  GuidanceCommand last_;
};

}  // namespace entrylab::fnpeg

#include "entrylab/detail/corrector.ipp"
