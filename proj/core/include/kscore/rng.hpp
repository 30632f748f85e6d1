#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace kscore {

/// Mixes a 64-bit value (SplitMix64 finalizer).
std::uint64_t mix64(std::uint64_t value);

/// Seed for an independent named stream derived from a master seed.
/// Streams with different names never share a seed sequence, so adding draws to
/// one (say, action sampling) leaves the others (env init, weight init) untouched.
std::uint64_t stream_seed(std::uint64_t master, std::string_view name, std::uint64_t index = 0);

/// Seedable generator for one named stream.
class Rng {
public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}
  Rng(std::uint64_t master, std::string_view name, std::uint64_t index = 0)
      : engine_(stream_seed(master, name, index)) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double normal(double mean, double stddev) { return std::normal_distribution<double>(mean, stddev)(engine_); }
  double standard_normal() { return normal_(engine_); }
  std::uint64_t next() { return engine_(); }

  engine_type& engine() { return engine_; }

private:
  engine_type engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Stream names used across the stack.
namespace streams {
inline constexpr std::string_view kEnvInit = "env-init";
inline constexpr std::string_view kActionSampling = "action-sampling";
inline constexpr std::string_view kWeightInit = "weight-init";
inline constexpr std::string_view kStreamNoise = "stream-noise";
inline constexpr std::string_view kMinibatch = "minibatch";
}  // namespace streams

}  // namespace kscore
