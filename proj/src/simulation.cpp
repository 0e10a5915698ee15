#include "entrylab/simulation.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "json.hpp"

#include "entrylab/errors.hpp"
#include "entrylab/features.hpp"

namespace entrylab::sim {

using dynamics::CartesianState;
using dynamics::SphericalState;

void validate(const SimSetup& s) {
  validate(s.mission);
  dynamics::validate(s.vehicle);
  dynamics::validate(s.planet);
  fnpeg::validate(s.guidance);
  if (!(s.dt > 0.0) || !(s.max_time > s.dt)) throw ConfigError("simulation step and horizon must be positive");
  const double cycle = 1.0 / (s.guidance.frequency_hz * s.dt);
  if (std::abs(cycle - std::round(cycle)) > 1e-9 || std::round(cycle) < 1.0) {
    throw ConfigError("the guidance period must be a whole number of integration steps");
  }
}

Measurement measure(double time, const CartesianState& c, double bank, const atmos::AtmosphereProfile& truth,
                    const dynamics::VehicleParams& vehicle, const dynamics::PlanetModel& planet) {
  Measurement m;
  m.time = time;
  m.nav = dynamics::cart_to_spherical(c);
  const double h_km = (m.nav.r - planet.radius) / 1000.0;
  const auto aero = dynamics::aero_accels(c, bank, truth.density_at(h_km), vehicle);
  m.accel = aero.accel;
  m.lift = aero.lift;
  m.drag = aero.drag;
  m.features = pipeline::make_features(m.nav, m.accel,
                                       pipeline::stagnation_pressure_feature(m.nav, truth, planet));
  return m;
}

namespace {

double nondim_energy(const CartesianState& c, const fnpeg::Scales& s) {
  return fnpeg::energy(c.r.norm() / s.radius, c.v.norm() / s.speed);
}

}  // namespace

SimResult simulate(const SimSetup& setup, const atmos::AtmosphereProfile& truth, DensityEstimator& estimator) {
  validate(setup);
  const auto& planet = setup.planet;
  const auto& vehicle = setup.vehicle;
  const auto target = fnpeg::GuidanceTarget::from_mission(setup.mission, planet);
  fnpeg::Guidance guidance(setup.guidance, target, vehicle, planet);
  const fnpeg::Scales scales(planet);
  const double ef = guidance.target_energy();
  const auto steps_per_cycle = static_cast<long>(std::llround(1.0 / (setup.guidance.frequency_hz * setup.dt)));
  const long max_steps = static_cast<long>(std::ceil(setup.max_time / setup.dt));

  SimResult res;
  CartesianState c = setup.mission.entry_state(planet);
  double bank = guidance.last().bank;
  double e = nondim_energy(c, scales);
  double h_prev = c.r.norm() - planet.radius;

  auto rhs = [&](const CartesianState& y) {
    const double h_km = (y.r.norm() - planet.radius) / 1000.0;
    return dynamics::cartesian_derivatives(y, bank, truth.density_at(h_km), vehicle, planet);
  };

  try {
    for (long step = 0; step < max_steps; ++step) {
      const double t = static_cast<double>(step) * setup.dt;
      if (step % steps_per_cycle == 0) {
        Measurement m = measure(t, c, bank, truth, vehicle, planet);
        CycleLog log;
        log.time = t;
        log.truth = c;
        log.nav = m.nav;
        log.accel = m.accel;
        log.lift = m.lift;
        log.drag = m.drag;
        log.load = std::hypot(m.lift, m.drag);
        log.density = truth.density_at((m.nav.r - planet.radius) / 1000.0);
        const SphericalState nav = m.nav;
        if (log.load >= setup.guidance.activation_load && e < ef) {
          if (setup.corrupt) setup.corrupt(m);
          estimator.observe(m);
          res.features.push_back(m.features);
          res.feature_times.push_back(t);
          log.observed = true;
        }
        log.command = guidance.step(nav, log.load, estimator);
        bank = log.command.bank;
        res.cycles.push_back(log);
      }
      if (setup.record_trajectory) {
        const auto s = dynamics::cart_to_spherical(c);
        const double h_km = (s.r - planet.radius) / 1000.0;
        const double rho = truth.density_at(h_km);
        const auto a = dynamics::aero_accels(c, bank, rho, vehicle).accel;
        res.trajectory.push_back(
            {t, s.r, s.lon, s.lat, s.v, s.fpa, s.heading, h_km, a.x(), a.y(), a.z(), bank, rho});
      }

      const CartesianState next = dynamics::rk4_step(rhs, c, setup.dt);
      const double e_next = nondim_energy(next, scales);
      const double h_next = next.r.norm() - planet.radius;
      if (!std::isfinite(e_next) || !next.r.allFinite() || !next.v.allFinite()) {
        throw NumericError("non-finite truth state");
      }
      if (h_next > h_prev) res.altitude_monotone = false;
      if (e_next >= ef) {
        const double frac = (ef - e) / (e_next - e);
        const CartesianState end = c + frac * (next + (-1.0) * c);
        res.final_time = t + frac * setup.dt;
        res.final_state = dynamics::cart_to_spherical(end);
        res.final_altitude_km = (res.final_state.r - planet.radius) / 1000.0;
        res.range_to_go = fnpeg::Guidance::signed_range(res.final_state, target) - target.range;
        res.miss_km = res.range_to_go * planet.radius / 1000.0;
        res.reversals = guidance.reversals();
        res.ok = true;
        return res;
      }
      if (h_next <= 0.0) {
        res.failure = "ground impact before the target energy";
        break;
      }
      c = next;
      e = e_next;
      h_prev = h_next;
    }
    if (res.failure.empty()) res.failure = "target energy not reached within the time horizon";
  } catch (const DomainError& ex) {
    res.failure = ex.what();
  } catch (const NumericError& ex) {
    res.failure = ex.what();
  }
  res.reversals = guidance.reversals();
  res.final_state = dynamics::cart_to_spherical(c);
  res.final_altitude_km = (res.final_state.r - planet.radius) / 1000.0;
  return res;
}

void write_trajectory(const std::filesystem::path& stem, const SimResult& r) {
  auto with_suffix = [&](const std::string& s) {
    auto p = stem;
    p += s;
    return p;
  };
  {
    std::ofstream f(with_suffix(".csv"));
    if (!f) throw IngestError("cannot write " + with_suffix(".csv").string());
    f << std::setprecision(17);
    f << "t,r,lon,lat,V,fpa,heading,h,a_x,a_y,a_z,sigma_cmd,rho_true\n";
    for (const auto& row : r.trajectory) {
      f << row.t << ',' << row.r << ',' << row.lon << ',' << row.lat << ',' << row.v << ',' << row.fpa << ','
        << row.heading << ',' << row.h_km << ',' << row.ax << ',' << row.ay << ',' << row.az << ',' << row.bank
        << ',' << row.density << '\n';
    }
  }
  {
    std::ofstream f(with_suffix("_guidance.csv"));
    if (!f) throw IngestError("cannot write " + with_suffix("_guidance.csv").string());
    f << std::setprecision(17);
    f << "t,active,sigma0,z,iterations,converged,stalled,prediction_failed,reversal,bank\n";
    for (const auto& c : r.cycles) {
      const auto& g = c.command;
      f << c.time << ',' << g.active << ',' << g.sigma0 << ',' << g.z << ',' << g.iterations << ',' << g.converged
        << ',' << g.stalled << ',' << g.prediction_failed << ',' << g.reversal << ',' << g.bank << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["ok"] = r.ok;
  j["failure"] = r.failure;
  j["final_time_s"] = r.final_time;
  j["final_altitude_km"] = r.final_altitude_km;
  j["range_to_go_rad"] = r.range_to_go;
  j["miss_km"] = r.miss_km;
  j["reversals"] = r.reversals;
  j["guidance_cycles"] = r.cycles.size();
  j["trajectory_csv"] = with_suffix(".csv").filename().string();
  j["guidance_csv"] = with_suffix("_guidance.csv").filename().string();
  std::ofstream f(with_suffix(".json"));
  if (!f) throw IngestError("cannot write " + with_suffix(".json").string());
  f << j.dump(2) << '\n';
}

}  // namespace entrylab::sim
