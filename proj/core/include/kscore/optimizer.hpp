#pragma once

#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "kscore/policy_net.hpp"

namespace kscore {

enum class OptimizerKind { Sgd, Adam };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view text);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::Adam;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::optional<double> clip_norm;

  void validate() const;
};

/// Gradient-ascent optimizer over a flat parameter vector.
class Optimizer {
public:
  explicit Optimizer(OptimizerConfig cfg);

  /// theta <- theta + step(g); `grad` is clipped to `clip_norm` first and zeroed after.
  /// Throws DivergenceError on a non-finite gradient.
  void apply_update(PolicyValueNet& net, GradientBuffer& grad);

  const OptimizerConfig& config() const { return cfg_; }
  long steps() const { return t_; }

private:
  OptimizerConfig cfg_;
  Eigen::VectorXd m_;
  Eigen::VectorXd v_;
  long t_ = 0;
};

}  // namespace kscore
