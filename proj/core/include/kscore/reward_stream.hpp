#pragma once

#include <cstdint>
#include <vector>

namespace kscore {

/// Synthetic return stream from the random-walk latent-mean model.
struct RewardStreamConfig {
  double q_true = 0.01;  // latent drift variance, >= 0
  double r_true = 1.0;   // observation variance, > 0
  double x_init = 0.0;
  std::uint64_t horizon = 10000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RewardStream {
  std::vector<double> latent;        // x_1..x_T
  std::vector<double> observations;  // G_1..G_T
};

RewardStream reward_stream_generate(const RewardStreamConfig& cfg);

}  // namespace kscore
