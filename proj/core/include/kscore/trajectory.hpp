#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kscore/environment.hpp"
#include "kscore/policy_net.hpp"
#include "kscore/rng.hpp"

namespace kscore {

/// One episode collected under the current policy.
struct Trajectory {
  std::vector<Observation> observations;
  std::vector<int> actions;
  std::vector<double> rewards;
  std::vector<double> log_probs;  // at collection time
  std::vector<double> values;     // V(s_t) at collection time
  bool terminated = false;
  bool truncated = false;
  double bootstrap_value = 0.0;  // V of the post-truncation observation, 0 otherwise

  // Filled by the update rules.
  std::vector<double> returns;
  std::vector<double> advantages;
  std::vector<double> normalized;

  std::size_t size() const { return rewards.size(); }
  double total_reward() const;
};

/// G_t = r_t + gamma * G_{t+1}, seeded with `bootstrap` past the last step
/// (0 for a terminated episode).
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma, double bootstrap = 0.0);

/// Raw returns of a trajectory, bootstrapping from bootstrap_value when truncated.
std::vector<double> trajectory_returns(const Trajectory& traj, double gamma);

/// delta_t = r_t + gamma * V(s_{t+1}) - V(s_t), A_t = delta_t + gamma * lambda * A_{t+1}.
/// `next_value` is V past the final step (0 when terminated).
std::vector<double> gae_advantages(std::span<const double> rewards, std::span<const double> values, double gamma,
                                   double lambda, double next_value = 0.0);

std::vector<double> gae_advantages(const Trajectory& traj, double gamma, double lambda);

enum class ActionSelection { Sample, Greedy };

/// Index drawn from a categorical distribution by inverse CDF.
int sample_categorical(const Eigen::Ref<const Eigen::VectorXd>& probs, Rng& rng);
int argmax_action(const Eigen::Ref<const Eigen::VectorXd>& probs);

/// Runs one episode from env.reset(reset_seed) to termination or truncation.
Trajectory collect_episode(Environment& env, const PolicyValueNet& net, Rng& action_rng, std::uint64_t reset_seed,
                           ActionSelection selection = ActionSelection::Sample);

/// Undiscounted return of one evaluation episode; nothing is recorded.
double evaluate_episode(Environment& env, const PolicyValueNet& net, Rng& action_rng, std::uint64_t reset_seed,
                        ActionSelection selection = ActionSelection::Greedy);

}  // namespace kscore
