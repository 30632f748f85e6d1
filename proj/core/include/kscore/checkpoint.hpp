#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kscore/policy_net.hpp"

namespace kscore {

/// Writes `path` (flat little-endian float64 parameter vector) and `path` + ".json"
/// (shapes, parameter count, config hash).
void save_checkpoint(const std::filesystem::path& path, const PolicyValueNet& net, const std::string& config_hash);

/// Loads a checkpoint written by save_checkpoint. Throws std::runtime_error if the
/// sidecar shape disagrees with the payload size.
PolicyValueNet load_checkpoint(const std::filesystem::path& path, std::string* config_hash = nullptr);

}  // namespace kscore
