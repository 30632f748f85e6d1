#include "kscore/reward_stream.hpp"

#include <cmath>
#include <stdexcept>

#include "kscore/rng.hpp"

namespace kscore {

void RewardStreamConfig::validate() const {
  if (!std::isfinite(q_true) || q_true < 0.0) throw std::invalid_argument("q_true must be >= 0");
  if (!std::isfinite(r_true) || r_true <= 0.0) throw std::invalid_argument("r_true must be > 0");
  if (!std::isfinite(x_init)) throw std::invalid_argument("x_init must be finite");
}

RewardStream reward_stream_generate(const RewardStreamConfig& cfg) {
  cfg.validate();
  Rng drift(cfg.seed, streams::kStreamNoise, 0);
  Rng noise(cfg.seed, streams::kStreamNoise, 1);
  const double q_sd = std::sqrt(cfg.q_true);
  const double r_sd = std::sqrt(cfg.r_true);

  RewardStream out;
  out.latent.reserve(cfg.horizon);
  out.observations.reserve(cfg.horizon);
  double x = cfg.x_init;
  for (std::uint64_t t = 0; t < cfg.horizon; ++t) {
    x += q_sd * drift.standard_normal();
    out.latent.push_back(x);
    out.observations.push_back(x + r_sd * noise.standard_normal());
  }
  return out;
}

}  // namespace kscore
