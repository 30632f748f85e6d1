#pragma once

// Scalar Kalman filter over the latent mean of a return stream.
//
// Model: the latent mean follows a random walk x_t = x_{t-1} + w_t, w_t ~ N(0, Q),
// and each observed return is G_t = x_t + v_t, v_t ~ N(0, R).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace kscore {

class FilterError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct NoiseParams {
  double q = 1e-2;  // process-noise variance, >= 0
  double r = 1.0;   // observation-noise variance, > 0

  /// Throws std::invalid_argument unless q >= 0 and r > 0 (both finite).
  void validate() const;
};

struct KalmanState {
  double x = 0.0;       // posterior mean
  double p = 1.0;       // posterior variance
  std::uint64_t t = 0;  // updates applied
};

struct StepDiagnostics {
  double gain = 0.0;
  double residual = 0.0;            // observation minus predicted mean
  double predicted_variance = 0.0;  // P_{t|t-1}
};

struct StepResult {
  KalmanState state;
  StepDiagnostics diagnostics;
};

struct AdaptiveConfig {
  double alpha = 0.9;     // EMA decay on R, in [0, 1)
  double r_init = 1.0;    // starting measurement noise
  double r_floor = 1e-6;  // lower clamp on R

  void validate() const;
};

/// Time update: mean carried over, variance grows by Q.
KalmanState predict(const KalmanState& state, const NoiseParams& params);

/// Measurement update of a predicted state. Throws FilterError on a non-finite
/// observation or a non-positive predicted variance.
StepResult update(const KalmanState& predicted, double observation, const NoiseParams& params);

/// update(predict(state)).
StepResult step(const KalmanState& state, double observation, const NoiseParams& params);

/// Closed-form fixed point of the variance recursion P <- (P + Q) R / (P + Q + R).
/// Exactly 0 when Q == 0.
double steady_state_variance(const NoiseParams& params);

/// Steady-state gain P_inf' / (P_inf' + R) where P_inf' = P_inf + Q.
double steady_state_gain(const NoiseParams& params);

/// One EMA step of the measurement noise from a residual taken against the prior mean:
/// max(r_floor, alpha * r_prev + (1 - alpha) * residual^2).
double adaptive_update_r(double r_prev, double residual, const AdaptiveConfig& cfg);

/// (observation - x) / sqrt(p + epsilon) for a post-update state.
double normalize(const KalmanState& state, double observation, double epsilon);

/// Stateful wrapper: predict, update and (optionally) adapt R per observation.
///
/// With an AdaptiveConfig the measurement noise is refreshed from the residual
/// against the prior mean before the update that consumes the same observation.
class KalmanFilter {
public:
  KalmanFilter(NoiseParams params, KalmanState initial, std::optional<AdaptiveConfig> adaptive = std::nullopt);

  StepDiagnostics observe(double observation);
  void reset();

  const KalmanState& state() const { return state_; }
  const NoiseParams& params() const { return params_; }
  const StepDiagnostics& last() const { return last_; }
  bool adaptive() const { return adaptive_.has_value(); }

private:
  NoiseParams params_;
  NoiseParams initial_params_;
  KalmanState initial_;
  KalmanState state_;
  std::optional<AdaptiveConfig> adaptive_;
  StepDiagnostics last_{};
};

}  // namespace kscore
