#pragma once

#include <array>
#include <cstdint>

#include "kscore/environment.hpp"

namespace kscore {

namespace cartpole {
inline constexpr double kGravity = 9.8;
inline constexpr double kMassCart = 1.0;
inline constexpr double kMassPole = 0.1;
inline constexpr double kTotalMass = kMassCart + kMassPole;
inline constexpr double kHalfLength = 0.5;
inline constexpr double kPoleMassLength = kMassPole * kHalfLength;
inline constexpr double kForceMag = 10.0;
inline constexpr double kTau = 0.02;
inline constexpr double kThetaThreshold = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;
inline constexpr double kXThreshold = 2.4;
inline constexpr int kMaxEpisodeSteps = 500;
inline constexpr double kRewardThreshold = 475.0;
}  // namespace cartpole

enum class CartPoleIntegrator { Euler, SemiImplicitEuler };

struct CartPoleState {
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  int steps_elapsed = 0;
  bool done = false;

  Observation observation() const;
};

struct CartPoleTransition {
  CartPoleState state;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

/// One control step of the classic cart-pole dynamics. action 1 pushes right,
/// 0 pushes left. Throws StepAfterDoneError if `state.done`.
CartPoleTransition cartpole_step(const CartPoleState& state, int action,
                                 CartPoleIntegrator integrator = CartPoleIntegrator::Euler);

/// Initial state with every component uniform in [-0.05, 0.05], deterministic per seed.
CartPoleState cartpole_initial_state(std::uint64_t seed);

class CartPole final : public Environment {
public:
  explicit CartPole(CartPoleIntegrator integrator = CartPoleIntegrator::Euler) : integrator_(integrator) {}

  Observation reset(std::uint64_t seed) override;
  EnvStep step(int action) override;

  int action_count() const override { return 2; }
  int observation_dim() const override { return 4; }
  double reward_threshold() const override { return cartpole::kRewardThreshold; }
  std::string id() const override { return "CartPole-v1"; }

  /// Overwrites the physical state and restarts the step counter (golden traces).
  void set_state(double x, double x_dot, double theta, double theta_dot);
  const CartPoleState& state() const { return state_; }

private:
  CartPoleIntegrator integrator_;
  CartPoleState state_{};
  bool started_ = false;
};

}  // namespace kscore
