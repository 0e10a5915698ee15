#include "entrylab/atmos.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <string>

#include "json.hpp"

#include "entrylab/errors.hpp"

namespace entrylab::atmos {
namespace {

constexpr double kLn10 = std::numbers::ln10;

double log_lerp(double h, double h0, double h1, double l0, double l1) {
  const double t = (h - h0) / (h1 - h0);
  return std::exp(l0 + t * (l1 - l0));
}

// Shared by mean_profile and generate_profile so that a zero-dispersion draw
// reproduces the mean profile bit-for-bit.
double mean_log10_density(double h_km, double dust, const SurrogateConfig& c) {
  const double d = dust - c.dust_reference;
  const double surface = c.base.surface_density * (1.0 + c.dust_surface_density_gain * d);
  const double scale = c.base.scale_height_km * (1.0 + c.dust_scale_height_gain * d);
  return std::log10(surface) - h_km / (scale * kLn10);
}

std::vector<double> altitude_grid(const SurrogateConfig& c) {
  const auto n = static_cast<std::size_t>(std::llround(c.grid_top_km / c.grid_step_km)) + 1;
  std::vector<double> h(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = static_cast<double>(k) * c.grid_step_km;
  return h;
}

}  // namespace

double exp_density(const ExponentialModel& model, double h_km) {
  if (!(model.surface_density > 0.0) || !(model.scale_height_km > 0.0)) {
    throw DomainError("exponential model parameters must be positive");
  }
  if (!(h_km >= 0.0)) throw DomainError("exp_density: negative altitude");
  return model.surface_density * std::exp(-h_km / model.scale_height_km);
}

void validate(const AtmoSample& s) {
  if (!(s.dust_level >= 0.1 && s.dust_level <= 3.0)) throw DomainError("dust_level outside [0.1, 3]");
  if (!(s.wave_offset >= 1.5 && s.wave_offset <= 2.5)) throw DomainError("wave_offset outside [1.5, 2.5]");
  if (s.seed < 1 || s.seed > 900000000ULL) throw DomainError("seed outside [1, 9e8]");
  if (!(s.perturbation_scale >= 0.0 && s.perturbation_scale <= 2.0)) {
    throw DomainError("perturbation_scale outside [0, 2]");
  }
}

AtmoSample draw_sample(std::mt19937_64& rng) {
  AtmoSample s;
  s.dust_level = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
  s.wave_offset = std::uniform_real_distribution<double>(1.5, 2.5)(rng);
  s.seed = std::uniform_int_distribution<std::uint64_t>(1, 900000000ULL)(rng);
  s.perturbation_scale = 2.0;
  return s;
}

void validate(const GasModel& gas) {
  if (!(gas.gamma > 1.0)) throw DomainError("ratio of specific heats must exceed 1");
  if (!(gas.gas_constant > 0.0) || !(gas.reference_temperature > 0.0)) {
    throw DomainError("gas constant and temperature must be positive");
  }
}

double speed_of_sound(const GasModel& gas, double /*h_km*/) {
  return std::sqrt(gas.gamma * gas.gas_constant * gas.reference_temperature);
}

double ideal_gas_pressure(const GasModel& gas, double density) {
  return density * gas.gas_constant * gas.reference_temperature;
}

AtmosphereProfile::AtmosphereProfile(std::vector<double> altitude_km, std::vector<double> density,
                                     const GasModel& gas)
    : altitude_km_(std::move(altitude_km)), density_(std::move(density)), gas_(gas) {
  validate(gas_);
  if (altitude_km_.size() < 2 || altitude_km_.size() != density_.size()) {
    throw DomainError("profile needs at least two nodes with matching density");
  }
  for (std::size_t k = 1; k < altitude_km_.size(); ++k) {
    if (!(altitude_km_[k] > altitude_km_[k - 1])) throw DomainError("profile altitudes must ascend");
  }
  log_density_.resize(density_.size());
  temperature_.assign(density_.size(), gas_.reference_temperature);
  pressure_.resize(density_.size());
  for (std::size_t k = 0; k < density_.size(); ++k) {
    if (!(density_[k] > 0.0) || !std::isfinite(density_[k])) {
      throw DomainError("profile density must be finite and positive");
    }
    log_density_[k] = std::log(density_[k]);
    pressure_[k] = ideal_gas_pressure(gas_, density_[k]);
  }
  first_altitude_ = altitude_km_.front();
  step_ = altitude_km_[1] - altitude_km_[0];
  uniform_ = true;
  for (std::size_t k = 1; k < altitude_km_.size(); ++k) {
    const double expected = first_altitude_ + static_cast<double>(k) * step_;
    if (std::abs(altitude_km_[k] - expected) > 1e-9 * std::max(1.0, std::abs(expected))) {
      uniform_ = false;
      break;
    }
  }
}

double AtmosphereProfile::density_at(double h_km) const {
  const std::size_t n = altitude_km_.size();
  std::size_t lo;
  if (h_km <= altitude_km_.front()) {
    lo = 0;
  } else if (h_km >= altitude_km_.back()) {
    lo = n - 2;
  } else if (uniform_) {
    lo = std::min(n - 2, static_cast<std::size_t>((h_km - first_altitude_) / step_));
  } else {
    lo = static_cast<std::size_t>(
             std::upper_bound(altitude_km_.begin(), altitude_km_.end(), h_km) - altitude_km_.begin()) -
         1;
  }
  if (h_km == altitude_km_[lo]) return density_[lo];
  if (h_km == altitude_km_[lo + 1]) return density_[lo + 1];
  return log_lerp(h_km, altitude_km_[lo], altitude_km_[lo + 1], log_density_[lo],
                  log_density_[lo + 1]);
}

AtmosphereProfile mean_profile(double dust_level, const GasModel& gas,
                               const SurrogateConfig& config) {
  auto h = altitude_grid(config);
  std::vector<double> rho(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    rho[k] = std::min(std::pow(10.0, mean_log10_density(h[k], dust_level, config)),
                      config.density_cap);
  }
  return AtmosphereProfile(std::move(h), std::move(rho), gas);
}

AtmosphereProfile generate_profile(const AtmoSample& sample, const GasModel& gas,
                                   const SurrogateConfig& config) {
  validate(sample);
  auto h = altitude_grid(config);
  std::vector<double> rho(h.size());

  std::mt19937_64 rng(sample.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  // Unit-variance Gauss-Markov process in altitude.
  const double phi = std::exp(-config.grid_step_km / config.correlation_length_km);
  const double drive = std::sqrt(1.0 - phi * phi);
  double x = normal(rng);

  const double gain = sample.perturbation_scale / 2.0;
  const double omega = 2.0 * std::numbers::pi / config.wave_period_km;
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (k > 0) x = phi * x + drive * normal(rng);
    const double sigma = config.sigma_surface_dex +
                         (config.sigma_top_dex - config.sigma_surface_dex) * h[k] / config.sigma_top_km;
    const double wave = config.wave_amplitude_dex * sample.wave_offset * std::sin(omega * h[k]);
    const double log10_rho = mean_log10_density(h[k], sample.dust_level, config) + wave +
                             gain * sigma * x;
    rho[k] = std::min(std::pow(10.0, log10_rho), config.density_cap);
  }
  return AtmosphereProfile(std::move(h), std::move(rho), gas);
}

AtmosphereProfile exponential_profile(const ExponentialModel& model, const GasModel& gas,
                                      const SurrogateConfig& config) {
  auto h = altitude_grid(config);
  std::vector<double> rho(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) rho[k] = exp_density(model, h[k]);
  return AtmosphereProfile(std::move(h), std::move(rho), gas);
}

double pressure_at(const GasModel& gas, const AtmosphereProfile& profile, double h_km) {
  return ideal_gas_pressure(gas, profile.density_at(h_km));
}

// ---------------------------------------------------------------------------

const std::array<double, kGridNodes>& prediction_grid() {
  static const auto grid = [] {
    std::array<double, kGridNodes> g{};
    for (std::size_t j = 0; j < kGridNodes; ++j) g[j] = kGridLowKm + kGridStepKm * static_cast<double>(j);
    return g;
  }();
  return grid;
}

double pseudodensity(double density) {
  if (!(density > 0.0) || !(density < 1.0)) {
    throw DomainError("pseudodensity needs 0 < rho < 1 kg/m^3");
  }
  return std::sqrt(-std::log10(density));
}

double density_from_pseudodensity(double eta) {
  if (!(eta >= 0.0)) throw DomainError("pseudodensity must be non-negative");
  return std::pow(10.0, -eta * eta);
}

PseudodensityProfile to_pseudodensity(const AtmosphereProfile& profile) {
  NodeValues rho{};
  const auto& grid = prediction_grid();
  for (std::size_t j = 0; j < kGridNodes; ++j) rho[j] = profile.density_at(grid[j]);
  return to_pseudodensity(rho);
}

PseudodensityProfile to_pseudodensity(const NodeValues& density) {
  PseudodensityProfile out;
  for (std::size_t j = 0; j < kGridNodes; ++j) out.eta[j] = pseudodensity(density[j]);
  return out;
}

NodeValues from_pseudodensity(const PseudodensityProfile& eta) {
  NodeValues rho{};
  for (std::size_t j = 0; j < kGridNodes; ++j) rho[j] = density_from_pseudodensity(eta.eta[j]);
  return rho;
}

GridDensity::GridDensity(const NodeValues& density) : density_(density) {
  for (std::size_t j = 0; j < kGridNodes; ++j) {
    if (!(density[j] > 0.0) || !std::isfinite(density[j])) {
      throw DomainError("grid density must be finite and positive");
    }
    log_density_[j] = std::log(density[j]);
  }
}

double GridDensity::operator()(double h_km) const {
  const double u = (h_km - kGridLowKm) / kGridStepKm;
  std::size_t lo;
  if (u <= 0.0) {
    lo = 0;
  } else if (u >= static_cast<double>(kGridNodes - 1)) {
    lo = kGridNodes - 2;
  } else {
    lo = std::min(kGridNodes - 2, static_cast<std::size_t>(u));
  }
  const double h0 = kGridLowKm + kGridStepKm * static_cast<double>(lo);
  if (h_km == h0) return density_[lo];
  if (h_km == h0 + kGridStepKm) return density_[lo + 1];
  return log_lerp(h_km, h0, h0 + kGridStepKm, log_density_[lo], log_density_[lo + 1]);
}

void write_profile(const std::filesystem::path& stem, const AtmoSample& sample,
                   const AtmosphereProfile& profile) {
  nlohmann::json manifest = {
      {"sample",
       {{"dust_level", sample.dust_level},
        {"wave_offset", sample.wave_offset},
        {"seed", sample.seed},
        {"perturbation_scale", sample.perturbation_scale}}},
      {"gas",
       {{"gamma", profile.gas().gamma},
        {"gas_constant", profile.gas().gas_constant},
        {"reference_temperature", profile.gas().reference_temperature}}},
      {"columns", {"h_km", "density", "temperature", "pressure"}},
  };
  auto json_path = stem;
  json_path += ".json";
  std::ofstream(json_path) << manifest.dump(2) << '\n';

  auto csv_path = stem;
  csv_path += ".csv";
  std::ofstream csv(csv_path);
  csv << "h_km,density,temperature,pressure\n" << std::setprecision(17);
  for (std::size_t k = 0; k < profile.size(); ++k) {
    csv << profile.altitude_km()[k] << ',' << profile.density()[k] << ','
        << profile.temperature()[k] << ',' << profile.pressure()[k] << '\n';
  }
}

}  // namespace entrylab::atmos
