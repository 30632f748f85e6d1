#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "kscore/algos.hpp"
#include "kscore/normalizers.hpp"
#include "kscore/optimizer.hpp"
#include "kscore/trajectory.hpp"

namespace kscore {

/// Invalid or unreadable configuration. The message names the offending key or file position.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to reproduce one training run.
///
/// Serialized as a flat JSON object; see configs/README.md for the key list.
struct RunConfig {
  std::string env = "CartPole-v1";
  AlgorithmKind algorithm = AlgorithmKind::Ppo;
  NormalizerSpec normalizer;
  AlgoConfig algo;
  int hidden = 64;
  OptimizerConfig optimizer;
  std::optional<double> learning_rate;  // unset: 3e-4 for PPO, 1e-3 otherwise
  std::uint64_t train_seed = 1;
  std::uint64_t eval_seed = 1000001;
  std::optional<double> reward_threshold;  // unset: environment default
  int eval_window = 20;
  int eval_every = 5;
  int max_episodes = 2000;
  ActionSelection eval_policy = ActionSelection::Greedy;
  std::string output;

  double effective_learning_rate() const;
  OptimizerConfig effective_optimizer() const;

  /// Throws ConfigError naming the first violated constraint.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Unknown keys and ill-typed values raise ConfigError naming the key.
RunConfig run_config_from_json(const nlohmann::json& j);

/// Reads a config file. Malformed JSON raises ConfigError with file, line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies "dotted.key=value". The value is parsed as JSON when possible and
/// kept as a string otherwise.
void apply_override(nlohmann::json& j, std::string_view assignment);

/// FNV-1a over the canonical JSON of the config with the output path removed.
std::string config_hash(const RunConfig& cfg);

}  // namespace kscore
