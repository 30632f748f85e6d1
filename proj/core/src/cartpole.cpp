#include "kscore/cartpole.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kscore/rng.hpp"

namespace kscore {

Observation CartPoleState::observation() const {
  Observation obs(4);
  obs << x, x_dot, theta, theta_dot;
  return obs;
}

CartPoleTransition cartpole_step(const CartPoleState& state, int action, CartPoleIntegrator integrator) {
  using namespace cartpole;
  if (state.done) throw StepAfterDoneError();
  if (action != 0 && action != 1) {
    throw std::invalid_argument("cart-pole action must be 0 or 1, got " + std::to_string(action));
  }

  const double force = action == 1 ? kForceMag : -kForceMag;
  const double costheta = std::cos(state.theta);
  const double sintheta = std::sin(state.theta);

  const double temp = (force + kPoleMassLength * (state.theta_dot * state.theta_dot) * sintheta) / kTotalMass;
  const double thetaacc = (kGravity * sintheta - costheta * temp) /
                          (kHalfLength * (4.0 / 3.0 - kMassPole * (costheta * costheta) / kTotalMass));
  const double xacc = temp - kPoleMassLength * thetaacc * costheta / kTotalMass;

  CartPoleTransition out;
  CartPoleState& next = out.state;
  if (integrator == CartPoleIntegrator::Euler) {
    next.x = state.x + kTau * state.x_dot;
    next.x_dot = state.x_dot + kTau * xacc;
    next.theta = state.theta + kTau * state.theta_dot;
    next.theta_dot = state.theta_dot + kTau * thetaacc;
  } else {
    next.x_dot = state.x_dot + kTau * xacc;
    next.x = state.x + kTau * next.x_dot;
    next.theta_dot = state.theta_dot + kTau * thetaacc;
    next.theta = state.theta + kTau * next.theta_dot;
  }
  next.steps_elapsed = state.steps_elapsed + 1;

  out.terminated = next.x < -kXThreshold || next.x > kXThreshold || next.theta < -kThetaThreshold ||
                   next.theta > kThetaThreshold;
  out.truncated = next.steps_elapsed >= kMaxEpisodeSteps;
  out.reward = 1.0;
  next.done = out.terminated || out.truncated;
  return out;
}

CartPoleState cartpole_initial_state(std::uint64_t seed) {
  Rng rng(seed, streams::kEnvInit);
  CartPoleState s;
  s.x = rng.uniform(-0.05, 0.05);
  s.x_dot = rng.uniform(-0.05, 0.05);
  s.theta = rng.uniform(-0.05, 0.05);
  s.theta_dot = rng.uniform(-0.05, 0.05);
  return s;
}

Observation CartPole::reset(std::uint64_t seed) {
  state_ = cartpole_initial_state(seed);
  started_ = true;
  return state_.observation();
}

EnvStep CartPole::step(int action) {
  if (!started_) throw StepAfterDoneError();
  const CartPoleTransition tr = cartpole_step(state_, action, integrator_);
  state_ = tr.state;
  return {state_.observation(), tr.reward, tr.terminated, tr.truncated};
}

void CartPole::set_state(double x, double x_dot, double theta, double theta_dot) {
  state_ = CartPoleState{x, x_dot, theta, theta_dot, 0, false};
  started_ = true;
}

std::unique_ptr<Environment> make_environment(std::string_view id) {
  if (id == "CartPole-v1") return std::make_unique<CartPole>();
  throw std::invalid_argument("unknown environment id '" + std::string(id) + "'");
}

}  // namespace kscore
