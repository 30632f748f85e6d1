#include "kscore/policy_net.hpp"

#include <cmath>
#include <string>

#include <Eigen/QR>

#include "kscore/rng.hpp"

namespace kscore {

Eigen::Index NetShape::parameter_count() const {
  const Eigen::Index o = observation_dim, h = hidden, a = action_count;
  return h * o + h + h * h + h + a * h + a + h + 1;
}

PolicyValueNet::PolicyValueNet(NetShape shape) : shape_(shape) {
  if (shape.observation_dim <= 0 || shape.hidden <= 0 || shape.action_count <= 0) {
    throw std::invalid_argument("network dimensions must be positive");
  }
  const Eigen::Index o = shape.observation_dim, h = shape.hidden, a = shape.action_count;
  off_.w1 = 0;
  off_.b1 = off_.w1 + h * o;
  off_.w2 = off_.b1 + h;
  off_.b2 = off_.w2 + h * h;
  off_.wp = off_.b2 + h;
  off_.bp = off_.wp + a * h;
  off_.wv = off_.bp + a;
  off_.bv = off_.wv + h;
  params_ = Eigen::VectorXd::Zero(shape.parameter_count());
}

namespace {

// rows x cols matrix with orthonormal rows or columns (whichever is fewer), times gain.
Eigen::MatrixXd orthogonal(int rows, int cols, double gain, Rng& rng) {
  const int big = std::max(rows, cols);
  const int small = std::min(rows, cols);
  Eigen::MatrixXd g(big, small);
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) g(i, j) = rng.standard_normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
  // sign fix so the decomposition is unique
  const Eigen::MatrixXd r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (int j = 0; j < small; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  Eigen::MatrixXd out = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
  return gain * out;
}

}  // namespace

PolicyValueNet PolicyValueNet::initialized(NetShape shape, std::uint64_t seed) {
  PolicyValueNet net(shape);
  Rng rng(seed, streams::kWeightInit);
  const int o = shape.observation_dim, h = shape.hidden, a = shape.action_count;
  auto& p = net.params_;
  Eigen::Map<Eigen::MatrixXd>(p.data() + net.off_.w1, h, o) = orthogonal(h, o, 1.0, rng);
  Eigen::Map<Eigen::MatrixXd>(p.data() + net.off_.w2, h, h) = orthogonal(h, h, 1.0, rng);
  Eigen::Map<Eigen::MatrixXd>(p.data() + net.off_.wp, a, h) = orthogonal(a, h, 0.01, rng);
  Eigen::Map<Eigen::MatrixXd>(p.data() + net.off_.wv, 1, h) = orthogonal(1, h, 1.0, rng);
  return net;
}

Eigen::VectorXd softmax(const Eigen::Ref<const Eigen::VectorXd>& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp();
  return e / e.sum();
}

ForwardResult PolicyValueNet::forward(const Eigen::Ref<const Eigen::VectorXd>& observation) const {
  const int o = shape_.observation_dim, h = shape_.hidden, a = shape_.action_count;
  if (observation.size() != o) {
    throw std::invalid_argument("observation has dimension " + std::to_string(observation.size()) + ", expected " +
                                std::to_string(o));
  }
  const double* p = params_.data();
  ForwardResult r;
  r.h1 = (MatMap(p + off_.w1, h, o) * observation + VecMap(p + off_.b1, h)).array().tanh();
  r.h2 = (MatMap(p + off_.w2, h, h) * r.h1 + VecMap(p + off_.b2, h)).array().tanh();
  r.logits = MatMap(p + off_.wp, a, h) * r.h2 + VecMap(p + off_.bp, a);
  r.value = VecMap(p + off_.wv, h).dot(r.h2) + p[off_.bv];
  if (!r.logits.allFinite() || !std::isfinite(r.value)) {
    throw DivergenceError("non-finite network output (parameters diverged)");
  }
  r.probs = softmax(r.logits);
  return r;
}

void PolicyValueNet::backward(const Eigen::Ref<const Eigen::VectorXd>& observation, const ForwardResult& fwd,
                              int action, const BackwardCoefficients& c, GradientBuffer& grad) const {
  if (!std::isfinite(c.policy_coef) || !std::isfinite(c.value_coef) || !std::isfinite(c.entropy_coef) ||
      !std::isfinite(c.value_target)) {
    throw DivergenceError("non-finite backward coefficient");
  }
  const int o = shape_.observation_dim, h = shape_.hidden, a = shape_.action_count;
  if (action < 0 || action >= a) throw std::invalid_argument("action out of range");
  if (grad.values.size() != params_.size()) throw std::invalid_argument("gradient buffer size mismatch");

  const Eigen::VectorXd& probs = fwd.probs;

  // d/dlogits of policy_coef*log p_a + entropy_coef*H
  Eigen::VectorXd dlogits = -c.policy_coef * probs;
  dlogits(action) += c.policy_coef;
  if (c.entropy_coef != 0.0) {
    const Eigen::ArrayXd logp = probs.array().max(1e-300).log();
    const double entropy = -(probs.array() * logp).sum();
    dlogits.array() -= c.entropy_coef * probs.array() * (logp + entropy);
  }
  const double dvalue = -2.0 * c.value_coef * (fwd.value - c.value_target);

  double* g = grad.values.data();
  const double* p = params_.data();
  Eigen::Map<Eigen::MatrixXd>(g + off_.wp, a, h).noalias() += dlogits * fwd.h2.transpose();
  Eigen::Map<Eigen::VectorXd>(g + off_.bp, a) += dlogits;
  Eigen::Map<Eigen::VectorXd>(g + off_.wv, h) += dvalue * fwd.h2;
  g[off_.bv] += dvalue;

  Eigen::VectorXd dh2 = MatMap(p + off_.wp, a, h).transpose() * dlogits + dvalue * VecMap(p + off_.wv, h);
  const Eigen::VectorXd dz2 = dh2.array() * (1.0 - fwd.h2.array().square());
  Eigen::Map<Eigen::MatrixXd>(g + off_.w2, h, h).noalias() += dz2 * fwd.h1.transpose();
  Eigen::Map<Eigen::VectorXd>(g + off_.b2, h) += dz2;

  const Eigen::VectorXd dh1 = MatMap(p + off_.w2, h, h).transpose() * dz2;
  const Eigen::VectorXd dz1 = dh1.array() * (1.0 - fwd.h1.array().square());
  Eigen::Map<Eigen::MatrixXd>(g + off_.w1, h, o).noalias() += dz1 * observation.transpose();
  Eigen::Map<Eigen::VectorXd>(g + off_.b1, h) += dz1;
}

void PolicyValueNet::accumulate(const Eigen::Ref<const Eigen::VectorXd>& observation, int action,
                                const BackwardCoefficients& coefs, GradientBuffer& grad) const {
  backward(observation, forward(observation), action, coefs, grad);
}

double PolicyValueNet::objective(const Eigen::Ref<const Eigen::VectorXd>& observation, int action,
                                 const BackwardCoefficients& c) const {
  const ForwardResult f = forward(observation);
  const LogProbEntropy le = log_prob_and_entropy(f.probs, action);
  const double dv = f.value - c.value_target;
  return c.policy_coef * le.log_prob - c.value_coef * dv * dv + c.entropy_coef * le.entropy;
}

std::vector<std::tuple<const char*, int, int>> PolicyValueNet::layout() const {
  const int o = shape_.observation_dim, h = shape_.hidden, a = shape_.action_count;
  return {{"trunk.w1", h, o}, {"trunk.b1", h, 1},  {"trunk.w2", h, h}, {"trunk.b2", h, 1},
          {"policy.w", a, h}, {"policy.b", a, 1},  {"value.w", 1, h},  {"value.b", 1, 1}};
}

LogProbEntropy log_prob_and_entropy(const Eigen::Ref<const Eigen::VectorXd>& probs, int action) {
  if (action < 0 || action >= probs.size()) throw std::invalid_argument("action out of range");
  LogProbEntropy out;
  out.log_prob = std::log(probs(action));
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) > 0.0) out.entropy -= probs(i) * std::log(probs(i));
  }
  return out;
}

}  // namespace kscore
