#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kscore/filter.hpp"
#include "kscore/reward_stream.hpp"

namespace kscore {

/// Estimators run side by side on a synthetic return stream.
struct FilterSimConfig {
  RewardStreamConfig stream;
  NoiseParams filter{1e-2, 1.0};
  double x0 = 0.0;
  double p0 = 1.0;
  double alpha = 0.9;
  double r_floor = 1e-6;
  double epsilon = 1e-8;
  std::uint64_t trials = 0;       // Monte Carlo replicates for the MSE curves; 0 disables
  std::uint64_t mse_horizon = 0;  // 0: same as stream.horizon

  void validate() const;
};

/// Keys: q_true, r_true, x_init, horizon, seed, q, r, x0, p0, alpha, r_floor,
/// epsilon, trials, mse_horizon. Unknown keys raise ConfigError.
FilterSimConfig filter_sim_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FilterSimConfig& cfg);

struct FilterSimRow {
  std::uint64_t t = 0;
  double latent = 0.0;
  double observation = 0.0;
  double sample_mean = 0.0;
  double kalman_x = 0.0;
  double kalman_p = 0.0;
  double kalman_gain = 0.0;
  double kalman_normalized = 0.0;
  double adaptive_x = 0.0;
  double adaptive_p = 0.0;
  double adaptive_gain = 0.0;
  double adaptive_r = 0.0;
  double sq_err_sample_mean = 0.0;
  double sq_err_kalman = 0.0;
  double sq_err_adaptive = 0.0;
  double sigma2_over_t = 0.0;
  double p_inf = 0.0;
};

/// Single-stream trace: latent, observation, each estimator and its squared
/// tracking error, plus the r_true/t and P_inf reference curves.
std::vector<FilterSimRow> filter_sim_trace(const FilterSimConfig& cfg);

struct TrackingMSERow {
  std::uint64_t t = 0;
  double sample_mean = 0.0;
  double kalman = 0.0;
  double adaptive = 0.0;
  double sigma2_over_t = 0.0;
};

/// Mean squared tracking error against the latent at each t, averaged over
/// cfg.trials independent streams (seeded from cfg.stream.seed).
std::vector<TrackingMSERow> tracking_mse_curves(const FilterSimConfig& cfg);

/// Time-averaged squared tracking error of the fixed Kalman filter and the
/// cumulative sample mean over one stream.
struct DriftTracking {
  double kalman = 0.0;
  double sample_mean = 0.0;
};
DriftTracking drift_tracking_error(const FilterSimConfig& cfg);

std::string filter_sim_csv(const std::vector<FilterSimRow>& rows);
std::string tracking_mse_csv(const std::vector<TrackingMSERow>& rows);

}  // namespace kscore
