#pragma once

// Dataset directory: manifest.json, records.bin and norm_stats.json.
//
// records.bin holds one record per trajectory: a u64 case seed, a u64 count L
// and L little-endian doubles laid out as
//   N, dust, wave_offset, atmosphere seed, perturbation scale, range_to_go,
//   final altitude, 39 targets, N times, N x 10 features.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "entrylab/pipeline.hpp"

namespace entrylab::pipeline {

struct DatasetManifest {
  std::string estimator;
  bool noise = false;
  std::uint64_t master_seed = 0;
  std::size_t requested = 0;
  std::size_t samples = 0;
  std::size_t failures = 0;
  std::string config_hash;
};

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

/// Writes the three files; the statistics are computed over all samples.
void write_dataset(const std::filesystem::path& dir, const Dataset& data, DatasetManifest manifest);

/// Throws IngestError on a missing or corrupt directory.
Dataset read_dataset(const std::filesystem::path& dir, DatasetManifest* manifest = nullptr);

void write_norm_stats(const std::filesystem::path& path, const NormalizationStats& stats);
NormalizationStats read_norm_stats(const std::filesystem::path& path);

}  // namespace entrylab::pipeline
