#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace kscore {

using Observation = Eigen::VectorXd;

struct EnvStep {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;

  bool done() const { return terminated || truncated; }
};

class StepAfterDoneError : public std::logic_error {
public:
  StepAfterDoneError() : std::logic_error("step() called on a finished episode; call reset() first") {}
};

/// Episodic environment with the reset/step(terminated, truncated) contract.
class Environment {
public:
  virtual ~Environment() = default;

  virtual Observation reset(std::uint64_t seed) = 0;
  virtual EnvStep step(int action) = 0;

  virtual int action_count() const = 0;
  virtual int observation_dim() const = 0;
  virtual double reward_threshold() const = 0;
  virtual std::string id() const = 0;
};

/// Registry lookup; currently "CartPole-v1".
std::unique_ptr<Environment> make_environment(std::string_view id);

}  // namespace kscore
