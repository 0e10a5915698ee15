#pragma once

// Monte Carlo campaigns, terminal-accuracy statistics and density error maps.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "entrylab/lstm.hpp"
#include "entrylab/noise.hpp"
#include "entrylab/pipeline.hpp"

namespace entrylab::evalmc {

/// One campaign case. Undershoot (landing short) is positive range-to-go.
struct CaseRecord {
  std::size_t case_id = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string failure;
  double s_f_deg = 0.0;
  double s_f_km = 0.0;
  bool undershoot = false;
};

/// Statistics of |s_f| in km over the successful cases.
struct Summary {
  std::string estimator;
  bool noise = false;
  std::size_t cases = 0;  // successful
  std::size_t failures = 0;
  double mean_km = 0.0;
  double std_km = 0.0;  // population
  double p1_km = 0.0;
  double p99_km = 0.0;
  double mean_signed_km = 0.0;
};

struct CampaignResult {
  std::string estimator;
  bool noise = false;
  std::vector<CaseRecord> cases;
  Summary summary;
};

/// Percentile p in [0, 100] by linear interpolation between order statistics
/// at rank p/100 * (n - 1). Throws DomainError on an empty set.
double percentile(std::vector<double> values, double p);

Summary summarize(const std::vector<CaseRecord>& cases, const std::string& estimator = "", bool noise = false);

/// Runs `count` cases with seeds case_seed(master, i). Failed cases are kept
/// with ok = false and excluded from the statistics.
CampaignResult run_campaign(const pipeline::CaseSetup& setup, std::size_t count, std::uint64_t master_seed,
                            int jobs);

/// Fixed-width text table, one row per summary.
std::string compare(const std::vector<Summary>& rows);

void write_results_csv(const std::filesystem::path& path, const CampaignResult& result);
void write_summary_json(const std::filesystem::path& path, const std::vector<Summary>& rows);
/// Counts of signed s_f (km) in bins of `bin_km`, for plotting.
void write_histogram_csv(const std::filesystem::path& path, const CampaignResult& result, double bin_km = 0.25);

/// 100 |rho_hat - rho| / rho.
double density_error_percent(double estimate, double truth);

/// Mean density error per (prefix length, node) over a test set. The reference
/// is each sample's target profile; row L averages the samples with at least L
/// steps.
struct DensityErrorMap {
  std::vector<atmos::NodeValues> mean;  // index L - 1
  std::vector<std::size_t> counts;
  double full_length = 0.0;             // node mean at each sample's last step
  std::array<double, 4> quartiles{};    // node mean at steps ceil(qN/4)
  double first_step = 0.0;
};

DensityErrorMap density_error_map(const neural::LstmModel& model, const std::vector<pipeline::TrajectorySample>& test);

void write_error_map_csv(const std::filesystem::path& path, const DensityErrorMap& map);

}  // namespace entrylab::evalmc
