#include "kscore/trajectory.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kscore {

double Trajectory::total_reward() const { return std::accumulate(rewards.begin(), rewards.end(), 0.0); }

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma, double bootstrap) {
  std::vector<double> out(rewards.size());
  double running = bootstrap;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + gamma * running;
    out[i] = running;
  }
  return out;
}

std::vector<double> trajectory_returns(const Trajectory& traj, double gamma) {
  const double bootstrap = (traj.truncated && !traj.terminated) ? traj.bootstrap_value : 0.0;
  return discounted_returns(traj.rewards, gamma, bootstrap);
}

std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                                   double lambda, double next_value) {
  if (rewards.size() != values.size()) throw std::invalid_argument("rewards and values differ in length");
  std::vector<double> adv(rewards.size());
  double running = 0.0;
  double v_next = next_value;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    const double delta = rewards[i] + gamma * v_next - values[i];
    running = delta + gamma * lambda * running;
    adv[i] = running;
    v_next = values[i];
  }
  return adv;
}

std::vector<double> gae_advantages(const Trajectory& traj, double gamma, double lambda) {
  const double next = (traj.truncated && !traj.terminated) ? traj.bootstrap_value : 0.0;
  return gae_advantages(traj.rewards, traj.values, gamma, lambda, next);
}

int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng) {
  const double u = rng.uniform(0.0, 1.0);
  double cdf = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    cdf += probs(i);
    if (u < cdf) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

int argmax_action(const Eigen::Ref<const Eigen::VectorXd>& probs) {
  Eigen::Index best = 0;
  probs.maxCoeff(&best);
  return static_cast<int>(best);
}

Trajectory collect_episode(Environment& env, const PolicyValueNet& net, Rng& action_rng, std::uint64_t reset_seed,
                           ActionSelection selection) {
  Trajectory traj;
  Observation obs = env.reset(reset_seed);
  while (true) {
    const ForwardResult f = net.forward(obs);
    const int action = selection == ActionSelection::Sample ? sample_categorical(f.probs, action_rng)
                                                            : argmax_action(f.probs);
    const EnvStep st = env.step(action);
    traj.observations.push_back(std::move(obs));
    traj.actions.push_back(action);
    traj.rewards.push_back(st.reward);
    traj.log_probs.push_back(std::log(f.probs(action)));
    traj.values.push_back(f.value);
    obs = st.observation;
    if (st.done()) {
      traj.terminated = st.terminated;
      traj.truncated = st.truncated;
      if (st.truncated && !st.terminated) traj.bootstrap_value = net.forward(obs).value;
      break;
    }
  }
  return traj;
}

double evaluate_episode(Environment& env, const PolicyValueNet& net, Rng& action_rng, std::uint64_t reset_seed,
                        ActionSelection selection) {
  Observation obs = env.reset(reset_seed);
  double total = 0.0;
  while (true) {
    const ForwardResult f = net.forward(obs);
    const int action = selection == ActionSelection::Sample ? sample_categorical(f.probs, action_rng)
                                                            : argmax_action(f.probs);
    EnvStep st = env.step(action);
    total += st.reward;
    if (st.done()) break;
    obs = std::move(st.observation);
  }
  return total;
}

}  // namespace kscore
