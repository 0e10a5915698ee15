#pragma once

// Mars atmosphere models: the nominal exponential law, a seedable stochastic
// surrogate for day-of-flight profiles, an isothermal CO2 gas model and the
// pseudodensity transform used as the network target.

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <vector>

namespace entrylab::atmos {

/// rho(h) = surface_density * exp(-h / scale_height)
struct ExponentialModel {
  double surface_density = 2.63e-2;  // kg/m^3
  double scale_height_km = 10.15;
};

/// Throws DomainError for h < 0 or a non-positive model parameter.
double exp_density(const ExponentialModel& model, double h_km);

/// Dispersed inputs of one surrogate atmosphere draw.
struct AtmoSample {
  double dust_level = 1.55;        // [0.1, 3.0]
  double wave_offset = 2.0;        // [1.5, 2.5]
  std::uint64_t seed = 1;          // [1, 9e8]
  double perturbation_scale = 2.0; // [0, 2]
};

/// Throws DomainError when a field is outside its admissible range.
void validate(const AtmoSample& sample);

/// Draw dust ~ U(0.1, 3), wave offset ~ U(1.5, 2.5), seed ~ U{1..9e8};
/// perturbation scale is fixed at its maximum (2).
AtmoSample draw_sample(std::mt19937_64& rng);

struct GasModel {
  double gamma = 1.28;
  double gas_constant = 188.92;        // J/(kg K)
  double reference_temperature = 210;  // K, isothermal
};

void validate(const GasModel& gas);

/// sqrt(gamma R T); the module is isothermal so h only documents the query.
double speed_of_sound(const GasModel& gas, double h_km);

/// Tunables of the surrogate generator. Defaults reproduce an altitude-growing
/// perturbation envelope of tens of percent at high altitude.
struct SurrogateConfig {
  ExponentialModel base;
  double dust_reference = 1.55;
  double dust_scale_height_gain = 0.03;
  double dust_surface_density_gain = 0.05;
  double wave_amplitude_dex = 0.02;
  double wave_period_km = 60.0;
  double correlation_length_km = 8.0;
  double sigma_surface_dex = 0.005;
  double sigma_top_dex = 0.12;
  double sigma_top_km = 130.0;
  double grid_top_km = 140.0;
  double grid_step_km = 0.5;
  double density_cap = 0.9;  // kg/m^3
};

/// Tabulated density/temperature/pressure on an ascending altitude grid.
class AtmosphereProfile {
 public:
  AtmosphereProfile() = default;
  AtmosphereProfile(std::vector<double> altitude_km, std::vector<double> density,
                    const GasModel& gas);

  std::span<const double> altitude_km() const { return altitude_km_; }
  std::span<const double> density() const { return density_; }
  std::span<const double> temperature() const { return temperature_; }
  std::span<const double> pressure() const { return pressure_; }
  const GasModel& gas() const { return gas_; }
  std::size_t size() const { return altitude_km_.size(); }

  /// Log-linear interpolation; log-linear extrapolation from the two nearest
  /// nodes outside the grid.
  double density_at(double h_km) const;

 private:
  std::vector<double> altitude_km_;
  std::vector<double> density_;
  std::vector<double> log_density_;
  std::vector<double> temperature_;
  std::vector<double> pressure_;
  GasModel gas_;
  double first_altitude_ = 0.0;
  double step_ = 0.0;
  bool uniform_ = false;
};

/// Mean (undispersed) profile for a given dust level.
AtmosphereProfile mean_profile(double dust_level, const GasModel& gas,
                               const SurrogateConfig& config = {});

/// Deterministic for a fixed sample: same seed gives a bit-identical profile.
AtmosphereProfile generate_profile(const AtmoSample& sample, const GasModel& gas,
                                   const SurrogateConfig& config = {});

/// Profile following an exponential law exactly (used as an oracle/truth).
AtmosphereProfile exponential_profile(const ExponentialModel& model, const GasModel& gas,
                                      const SurrogateConfig& config = {});

/// P = rho R T at the module's isothermal temperature.
double ideal_gas_pressure(const GasModel& gas, double density);
double pressure_at(const GasModel& gas, const AtmosphereProfile& profile, double h_km);

// ---------------------------------------------------------------------------
// Pseudodensity

inline constexpr std::size_t kGridNodes = 39;
inline constexpr double kGridLowKm = 4.0;
inline constexpr double kGridStepKm = 2.0;

/// Prediction altitudes 4, 6, ..., 80 km.
const std::array<double, kGridNodes>& prediction_grid();

using NodeValues = std::array<double, kGridNodes>;

struct PseudodensityProfile {
  NodeValues eta{};
};

/// eta = sqrt(-log10 rho). Throws DomainError for rho >= 1 or rho <= 0.
double pseudodensity(double density);
/// rho = 10^(-eta^2). Throws DomainError for eta < 0.
double density_from_pseudodensity(double eta);

PseudodensityProfile to_pseudodensity(const AtmosphereProfile& profile);
PseudodensityProfile to_pseudodensity(const NodeValues& density);
NodeValues from_pseudodensity(const PseudodensityProfile& eta);

/// Log-linear interpolation of node densities, extrapolated outside the grid.
class GridDensity {
 public:
  GridDensity() = default;
  explicit GridDensity(const NodeValues& density);
  double operator()(double h_km) const;
  const NodeValues& density() const { return density_; }

 private:
  NodeValues density_{};
  NodeValues log_density_{};
};

/// Writes <stem>.json (sample, gas) and <stem>.csv (h_km,density,temperature,pressure).
void write_profile(const std::filesystem::path& stem, const AtmoSample& sample,
                   const AtmosphereProfile& profile);

}  // namespace entrylab::atmos
