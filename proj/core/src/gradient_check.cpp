#include "kscore/gradient_check.hpp"

#include <algorithm>
#include <cmath>

#include "kscore/rng.hpp"

namespace kscore {

double gradient_relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (scale < floor) return 0.0;
  return std::abs(analytic - numeric) / scale;
}

double max_gradient_error(const PolicyValueNet& net, const Eigen::VectorXd& observation, int action,
                          const BackwardCoefficients& coefs, double step) {
  GradientBuffer grad = net.make_gradient_buffer();
  net.accumulate(observation, action, coefs, grad);

  PolicyValueNet probe = net;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < probe.parameters().size(); ++i) {
    const double saved = probe.parameters()(i);
    probe.parameters()(i) = saved + step;
    const double up = probe.objective(observation, action, coefs);
    probe.parameters()(i) = saved - step;
    const double down = probe.objective(observation, action, coefs);
    probe.parameters()(i) = saved;
    const double numeric = (up - down) / (2.0 * step);
    worst = std::max(worst, gradient_relative_error(grad.values(i), numeric));
  }
  return worst;
}

GradientCheckResult gradient_check(int cases, std::uint64_t seed, double step) {
  GradientCheckResult result;
  Rng rng(seed, "gradient-check");
  for (int c = 0; c < cases; ++c) {
    NetShape shape;
    shape.observation_dim = 2 + static_cast<int>(rng.next() % 4);
    shape.hidden = 3 + static_cast<int>(rng.next() % 6);
    shape.action_count = 2 + static_cast<int>(rng.next() % 3);
    PolicyValueNet net(shape);
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) net.parameters()(i) = rng.normal(0.0, 0.7);
    Eigen::VectorXd obs(shape.observation_dim);
    for (Eigen::Index i = 0; i < obs.size(); ++i) obs(i) = rng.uniform(-1.5, 1.5);
    const int action = static_cast<int>(rng.next() % static_cast<std::uint64_t>(shape.action_count));
    BackwardCoefficients coefs;
    coefs.policy_coef = rng.uniform(-2.0, 2.0);
    coefs.value_coef = rng.uniform(0.0, 1.0);
    coefs.entropy_coef = rng.uniform(0.0, 0.5);
    coefs.value_target = rng.uniform(-2.0, 2.0);

    result.max_relative_error = std::max(result.max_relative_error, max_gradient_error(net, obs, action, coefs, step));
    result.entries += net.parameters().size();
    ++result.cases;
  }
  return result;
}

}  // namespace kscore
