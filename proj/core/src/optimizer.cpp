#include "kscore/optimizer.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kscore {

std::string_view to_string(OptimizerKind kind) { return kind == OptimizerKind::Sgd ? "sgd" : "adam"; }

OptimizerKind parse_optimizer_kind(std::string_view text) {
  if (text == "sgd") return OptimizerKind::Sgd;
  if (text == "adam") return OptimizerKind::Adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(text) + "' (expected sgd, adam)");
}

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw std::invalid_argument("learning rate must be > 0");
  if (clip_norm && !(*clip_norm > 0.0)) throw std::invalid_argument("clip norm must be > 0");
  if (kind == OptimizerKind::Adam) {
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) {
      throw std::invalid_argument("adam betas must lie in [0, 1)");
    }
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("adam epsilon must be > 0");
  }
}

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

void Optimizer::apply_update(PolicyValueNet& net, GradientBuffer& grad) {
  auto& theta = net.parameters();
  auto& g = grad.values;
  if (g.size() != theta.size()) throw std::invalid_argument("gradient buffer size mismatch");
  if (!g.allFinite()) throw DivergenceError("non-finite gradient");

  if (cfg_.clip_norm) {
    const double n = g.norm();
    if (n > *cfg_.clip_norm) g *= *cfg_.clip_norm / n;
  }

  ++t_;
  if (cfg_.kind == OptimizerKind::Sgd) {
    theta += cfg_.learning_rate * g;
  } else {
    if (m_.size() != theta.size()) {
      m_ = Eigen::VectorXd::Zero(theta.size());
      v_ = Eigen::VectorXd::Zero(theta.size());
    }
    m_ = cfg_.adam_beta1 * m_ + (1.0 - cfg_.adam_beta1) * g;
    v_ = cfg_.adam_beta2 * v_ + (1.0 - cfg_.adam_beta2) * g.cwiseAbs2();
    const double bc1 = 1.0 - std::pow(cfg_.adam_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.adam_beta2, static_cast<double>(t_));
    theta.array() += cfg_.learning_rate * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + cfg_.adam_epsilon);
  }
  grad.zero();
}

}  // namespace kscore
