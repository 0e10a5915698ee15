#pragma once

#include <filesystem>

#include "entrylab/lstm.hpp"

namespace entrylab::neural {

inline constexpr int kModelFormatVersion = 1;

/// JSON container: architecture, training seed, normalization statistics and
/// every tensor (explicit rows/cols, row-major doubles).
void save_model(const std::filesystem::path& path, const LstmModel& model);

/// Throws IngestError on a missing file, wrong format/version or a tensor
/// whose shape disagrees with the architecture.
LstmModel load_model(const std::filesystem::path& path);

}  // namespace entrylab::neural
