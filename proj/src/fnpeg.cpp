#include "entrylab/fnpeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "entrylab/errors.hpp"

namespace entrylab::fnpeg {

using dynamics::SphericalState;

void validate(const GuidanceConfig& c) {
  if (!(c.tolerance > 0.0)) throw ConfigError("guidance tolerance must be positive");
  if (!(c.final_bank > 0.0 && c.final_bank < std::numbers::pi / 2)) {
    throw ConfigError("final bank must lie in (0, 90) deg");
  }
  if (!(c.frequency_hz > 0.0)) throw ConfigError("guidance frequency must be positive");
  if (!(c.activation_load >= 0.0)) throw ConfigError("activation load must be non-negative");
  if (!(c.deadband_entry > 0.0) || !(c.deadband_final > 0.0)) throw ConfigError("deadbands must be positive");
  if (c.deadband_entry_speed == c.deadband_final_speed) throw ConfigError("deadband anchor speeds coincide");
  if (c.predictor_steps < 1 || c.max_iterations < 1 || c.max_halvings < 0) {
    throw ConfigError("predictor/corrector iteration limits must be positive");
  }
  if (!(c.fd_step > 0.0)) throw ConfigError("finite-difference step must be positive");
}

GuidanceTarget GuidanceTarget::from_mission(const Mission& m, const dynamics::PlanetModel& planet) {
  GuidanceTarget t;
  t.radius = m.target_radius(planet);
  t.speed = m.target_speed;
  t.lon = m.target_lon_deg * kDeg;
  t.lat = m.target_lat_deg * kDeg;
  t.range = m.target_range_deg * kDeg;
  return t;
}

double energy(double r_nd, double v_nd) { return 1.0 / r_nd - 0.5 * v_nd * v_nd; }

double bank_profile(double e, double e0, double ef, double sigma0, double sigmaf) {
  if (ef == e0) throw DomainError("bank_profile: e0 equals e_f");
  return sigma0 + (e - e0) / (ef - e0) * (sigmaf - sigma0);
}

namespace {

// d/de of (r, V, fpa, s) using de/dtau = V D.
struct EnergyDerivative {
  const PredictorInputs& in;
  Scales scales;
  double e0;
  double sigma0;
  double lift_scale;
  double drag_scale;

  LongitudinalState operator()(double e, const LongitudinalState& y) const {
    if (!std::isfinite(y.r) || !std::isfinite(y.v) || !std::isfinite(y.fpa) || !std::isfinite(y.s)) {
      throw PredictionFailure("non-finite predicted state");
    }
    const double h_km = (y.r - 1.0) * scales.radius / 1000.0;
    if (!(h_km >= 0.0)) throw PredictionFailure("predicted trajectory reaches the surface");
    if (!(y.v > 0.0)) throw PredictionFailure("predicted speed vanished");
    const double rho = in.estimator->density_at(h_km);
    const double v_dim = y.v * scales.speed;
    const double q_over_beta = rho * v_dim * v_dim / (2.0 * in.vehicle.ballistic_coefficient) / scales.g0;
    const double drag = q_over_beta * drag_scale;
    const double lift = q_over_beta * in.vehicle.lift_to_drag * lift_scale;
    if (!(drag > 0.0) || !std::isfinite(drag)) {
      throw PredictionFailure("non-positive drag: energy is not monotone along the arc");
    }
    const double sigma = bank_profile(e, e0, in.target_energy, sigma0, in.final_bank);
    const double sg = std::sin(y.fpa), cg = std::cos(y.fpa);
    const double inv_r2 = 1.0 / (y.r * y.r);
    const double edot = y.v * drag;
    LongitudinalState d;
    d.r = y.v * sg / edot;
    d.v = (-drag - sg * inv_r2) / edot;
    d.fpa = (lift * std::cos(sigma) - cg * inv_r2 + y.v * y.v / y.r * cg) / (y.v * edot);
    d.s = -y.v * cg / y.r / edot;
    return d;
  }
};

LongitudinalState axpy(const LongitudinalState& y, double a, const LongitudinalState& k) {
  return {y.r + a * k.r, y.v + a * k.v, y.fpa + a * k.fpa, y.s + a * k.s};
}

template <class Visitor>
LongitudinalState integrate(const LongitudinalState& start, double sigma0, const PredictorInputs& in,
                            Visitor&& visit) {
  if (in.estimator == nullptr) throw ConfigError("predictor needs a density estimator");
  if (in.steps < 1) throw ConfigError("predictor needs at least one step");
  const double e0 = energy(start.r, start.v);
  if (!(in.target_energy > e0)) throw PredictionFailure("current energy already at or past the target");
  const EnergyDerivative f{in, Scales(in.planet), e0, sigma0, in.estimator->lift_scale(),
                           in.estimator->drag_scale()};
  const double de = (in.target_energy - e0) / in.steps;
  LongitudinalState y = start;
  visit(e0, y);
  for (int k = 0; k < in.steps; ++k) {
    const double e = e0 + de * k;
    const auto k1 = f(e, y);
    const auto k2 = f(e + 0.5 * de, axpy(y, 0.5 * de, k1));
    const auto k3 = f(e + 0.5 * de, axpy(y, 0.5 * de, k2));
    const auto k4 = f(e + de, axpy(y, de, k3));
    y.r += de / 6.0 * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r);
    y.v += de / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v);
    y.fpa += de / 6.0 * (k1.fpa + 2.0 * k2.fpa + 2.0 * k3.fpa + k4.fpa);
    y.s += de / 6.0 * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s);
    visit(k + 1 == in.steps ? in.target_energy : e + de, y);
  }
  if (!std::isfinite(y.s)) throw NumericError("predicted range is not finite");
  return y;
}

}  // namespace

double predict_range(const LongitudinalState& start, double sigma0, const PredictorInputs& in) {
  const auto end = integrate(start, sigma0, in, [](double, const LongitudinalState&) {});
  return end.s - in.target_range;
}

std::vector<PredictedNode> predict_arc(const LongitudinalState& start, double sigma0,
                                       const PredictorInputs& in) {
  std::vector<PredictedNode> arc;
  arc.reserve(static_cast<std::size_t>(in.steps) + 1);
  integrate(start, sigma0, in, [&](double e, const LongitudinalState& y) { arc.push_back({e, y}); });
  return arc;
}

double deadband(double speed, const GuidanceConfig& c) {
  const double c1 = (c.deadband_entry - c.deadband_final) / (c.deadband_entry_speed - c.deadband_final_speed);
  const double c0 = c.deadband_final - c1 * c.deadband_final_speed;
  return c1 * speed + c0;
}

int lateral_channel(double heading, double azimuth, double speed, int sign, const GuidanceConfig& c) {
  const double offset = dynamics::wrap_pi(azimuth - heading);
  if (std::abs(offset) >= deadband(speed, c)) {
    // Positive bank increases heading; turn towards the target azimuth.
    const int towards = offset >= 0.0 ? 1 : -1;
    if (sign != towards) return -sign;
  }
  return sign;
}

Guidance::Guidance(const GuidanceConfig& config, const GuidanceTarget& target,
                   const dynamics::VehicleParams& vehicle, const dynamics::PlanetModel& planet)
    : config_(config),
      target_(target),
      vehicle_(vehicle),
      planet_(planet),
      scales_(planet),
      target_energy_(energy(target.radius / planet.radius, target.speed / scales_.speed)),
      sigma0_(config.initial_bank) {
  validate(config_);
  last_.magnitude = sigma0_;
  last_.sigma0 = sigma0_;
  last_.sign = sign_;
  last_.bank = sign_ * sigma0_;
}

double Guidance::signed_range(const SphericalState& nav, const GuidanceTarget& target) {
  const double s = dynamics::great_circle_angle(nav.lon, nav.lat, target.lon, target.lat);
  const double az = dynamics::great_circle_azimuth(nav.lon, nav.lat, target.lon, target.lat);
  return std::cos(az - nav.heading) >= 0.0 ? s : -s;
}

GuidanceCommand Guidance::step(const SphericalState& nav, double sensed_load,
                               const DensityEstimator& estimator) {
  GuidanceCommand cmd = last_;
  cmd.active = false;
  cmd.iterates.clear();
  cmd.reversal = false;
  if (sensed_load < config_.activation_load) {
    last_ = cmd;
    return cmd;
  }
  const double r_nd = nav.r / scales_.radius;
  const double v_nd = nav.v / scales_.speed;
  if (!(energy(r_nd, v_nd) < target_energy_)) {
    last_ = cmd;
    return cmd;
  }
  engaged_ = true;
  cmd.active = true;
  cmd.prediction_failed = false;

  const LongitudinalState start{r_nd, v_nd, nav.fpa,
                                dynamics::great_circle_angle(nav.lon, nav.lat, target_.lon, target_.lat)};
  PredictorInputs in;
  in.estimator = &estimator;
  in.vehicle = vehicle_;
  in.planet = planet_;
  in.target_energy = target_energy_;
  in.target_range = target_.range;
  in.final_bank = config_.final_bank;
  in.steps = config_.predictor_steps;
  try {
    const auto res = correct_bank([&](double sigma) { return predict_range(start, sigma, in); },
                                  sigma0_, config_);
    sigma0_ = res.sigma0;
    cmd.z = res.z;
    cmd.dz = res.dz;
    cmd.iterates = res.history;
    cmd.iterations = res.iterations;
    cmd.converged = res.converged;
    cmd.stalled = res.stalled;
  } catch (const PredictionFailure&) {
    cmd.prediction_failed = true;
    cmd.converged = false;
    cmd.stalled = false;
    cmd.iterations = 0;
    cmd.iterates.clear();
  }

  const double azimuth = dynamics::great_circle_azimuth(nav.lon, nav.lat, target_.lon, target_.lat);
  const int sign = lateral_channel(nav.heading, azimuth, nav.v, sign_, config_);
  cmd.reversal = sign != sign_;
  if (cmd.reversal) ++reversals_;
  sign_ = sign;

  cmd.sigma0 = sigma0_;
  cmd.magnitude = sigma0_;
  cmd.sign = sign_;
  cmd.bank = sign_ * sigma0_;
  last_ = cmd;
  return cmd;
}

}  // namespace entrylab::fnpeg
