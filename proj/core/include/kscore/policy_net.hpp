#pragma once

#include <cstdint>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace kscore {

class DivergenceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct NetShape {
  int observation_dim = 4;
  int hidden = 64;
  int action_count = 2;

  /// Total number of scalar parameters.
  Eigen::Index parameter_count() const;
  bool operator==(const NetShape&) const = default;
};

/// Everything the backward pass needs from one forward pass.
struct ForwardResult {
  Eigen::VectorXd h1;
  Eigen::VectorXd h2;
  Eigen::VectorXd logits;
  Eigen::VectorXd probs;
  double value = 0.0;
};

/// Objective weights for one sample. backward() accumulates the gradient of
///   policy_coef * log pi(a|s) - value_coef * (V(s) - value_target)^2 + entropy_coef * H(pi(.|s)).
struct BackwardCoefficients {
  double policy_coef = 0.0;
  double value_coef = 0.0;
  double entropy_coef = 0.0;
  double value_target = 0.0;
};

/// Accumulated gradient in the same flat layout as the network parameters.
struct GradientBuffer {
  Eigen::VectorXd values;

  explicit GradientBuffer(Eigen::Index size = 0) : values(Eigen::VectorXd::Zero(size)) {}
  void zero() { values.setZero(); }
  double norm() const { return values.norm(); }
};

/// Shared tanh trunk (obs -> H -> H) with a softmax policy head and a scalar value head.
///
/// All parameters live in one contiguous vector:
///   W1 (H x obs), b1 (H), W2 (H x H), b2 (H), Wp (A x H), bp (A), Wv (1 x H), bv (1)
/// with matrices stored column-major.
class PolicyValueNet {
public:
  explicit PolicyValueNet(NetShape shape);

  /// Orthogonal init: trunk gain 1, policy head gain 0.01, value head gain 1, zero biases.
  static PolicyValueNet initialized(NetShape shape, std::uint64_t seed);

  /// Throws std::invalid_argument on dimension mismatch and DivergenceError on
  /// non-finite activations.
  ForwardResult forward(const Eigen::Ref<const Eigen::VectorXd>& observation) const;

  /// Adds the gradient of the per-sample objective to `grad`. Requires the
  /// ForwardResult computed for the same observation and current parameters.
  void backward(const Eigen::Ref<const Eigen::VectorXd>& observation, const ForwardResult& fwd, int action,
                const BackwardCoefficients& coefs, GradientBuffer& grad) const;

  /// Convenience: forward() then backward().
  void accumulate(const Eigen::Ref<const Eigen::VectorXd>& observation, int action,
                  const BackwardCoefficients& coefs, GradientBuffer& grad) const;

  /// Objective value matching backward(); used by finite-difference checks.
  double objective(const Eigen::Ref<const Eigen::VectorXd>& observation, int action,
                   const BackwardCoefficients& coefs) const;

  GradientBuffer make_gradient_buffer() const { return GradientBuffer(params_.size()); }

  const NetShape& shape() const { return shape_; }
  Eigen::VectorXd& parameters() { return params_; }
  const Eigen::VectorXd& parameters() const { return params_; }

  /// (name, rows, cols) for each parameter block in layout order.
  std::vector<std::tuple<const char*, int, int>> layout() const;

private:
  using MatMap = Eigen::Map<const Eigen::MatrixXd>;
  using VecMap = Eigen::Map<const Eigen::VectorXd>;

  struct Offsets {
    Eigen::Index w1, b1, w2, b2, wp, bp, wv, bv;
  };

  NetShape shape_;
  Offsets off_{};
  Eigen::VectorXd params_;
};

struct LogProbEntropy {
  double log_prob = 0.0;
  double entropy = 0.0;
};

LogProbEntropy log_prob_and_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int action);

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits);

}  // namespace kscore
