#include "kscore/filter.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kscore {

void NoiseParams::validate() const {
  if (!std::isfinite(q) || q < 0.0) {
    throw std::invalid_argument("process noise Q must be finite and >= 0, got " + std::to_string(q));
  }
  if (!std::isfinite(r) || r <= 0.0) {
    throw std::invalid_argument("observation noise R must be finite and > 0, got " + std::to_string(r));
  }
}

void AdaptiveConfig::validate() const {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("adaptive alpha must lie in [0, 1)");
  }
  if (!(r_floor > 0.0) || !std::isfinite(r_floor)) {
    throw std::invalid_argument("adaptive R floor must be > 0");
  }
  if (!(r_init > 0.0) || !std::isfinite(r_init)) {
    throw std::invalid_argument("adaptive R_init must be > 0");
  }
}

KalmanState predict(const KalmanState& state, const NoiseParams& params) {
  return {state.x, state.p + params.q, state.t};
}

StepResult update(const KalmanState& predicted, double observation, const NoiseParams& params) {
  if (!std::isfinite(observation)) {
    std::ostringstream msg;
    msg << "non-finite observation " << observation << " at filter step " << predicted.t + 1
        << " (upstream return is NaN/Inf)";
    throw FilterError(msg.str());
  }
  if (!(predicted.p > 0.0)) {
    throw FilterError("predicted variance must be > 0");
  }
  StepDiagnostics diag;
  diag.predicted_variance = predicted.p;
  diag.gain = predicted.p / (predicted.p + params.r);
  diag.residual = observation - predicted.x;

  KalmanState next;
  next.x = predicted.x + diag.gain * diag.residual;
  // (1 - K) P without forming 1 - K, which cancels badly when K is near 1
  next.p = predicted.p * params.r / (predicted.p + params.r);
  next.t = predicted.t + 1;
  return {next, diag};
}

StepResult step(const KalmanState& state, double observation, const NoiseParams& params) {
  return update(predict(state, params), observation, params);
}

double steady_state_variance(const NoiseParams& params) {
  params.validate();
  const double q = params.q;
  const double r = params.r;
  if (q == 0.0) return 0.0;
  // (sqrt(Q^2 + 4QR) - Q) / 2, rationalized to avoid cancellation when Q >> R.
  return 2.0 * q * r / (std::sqrt(q * q + 4.0 * q * r) + q);
}

double steady_state_gain(const NoiseParams& params) {
  const double predicted = steady_state_variance(params) + params.q;
  return predicted / (predicted + params.r);
}

double adaptive_update_r(double r_prev, double residual, const AdaptiveConfig& cfg) {
  const double r = cfg.alpha * r_prev + (1.0 - cfg.alpha) * residual * residual;
  return std::max(cfg.r_floor, r);
}

double normalize(const KalmanState& state, double observation, double epsilon) {
  return (observation - state.x) / std::sqrt(state.p + epsilon);
}

KalmanFilter::KalmanFilter(NoiseParams params, KalmanState initial, std::optional<AdaptiveConfig> adaptive)
    : params_(params), initial_params_(params), initial_(initial), state_(initial), adaptive_(adaptive) {
  if (adaptive_) {
    adaptive_->validate();
    params_.r = adaptive_->r_init;
    initial_params_.r = adaptive_->r_init;
  }
  params_.validate();
  if (!(initial.p > 0.0) || !std::isfinite(initial.p) || !std::isfinite(initial.x)) {
    throw std::invalid_argument("initial filter variance must be finite and > 0");
  }
}

StepDiagnostics KalmanFilter::observe(double observation) {
  if (adaptive_ && std::isfinite(observation)) {
    params_.r = adaptive_update_r(params_.r, observation - state_.x, *adaptive_);
  }
  const StepResult result = step(state_, observation, params_);
  state_ = result.state;
  last_ = result.diagnostics;
  return last_;
}

void KalmanFilter::reset() {
  state_ = initial_;
  params_ = initial_params_;
  last_ = {};
}

}  // namespace kscore
