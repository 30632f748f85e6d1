#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "kscore/normalizers.hpp"
#include "kscore/optimizer.hpp"
#include "kscore/policy_net.hpp"
#include "kscore/rng.hpp"
#include "kscore/trajectory.hpp"

namespace kscore {

enum class AlgorithmKind { Reinforce, ActorCritic, Gae, Ppo };

/// Which stream the normalizer consumes: discounted returns or advantages.
enum class InsertionPoint { Returns, Advantages };

/// What the value head regresses on when returns are normalized.
enum class CriticTarget { Normalized, Raw };

/// PPO advantage estimator: normalized return minus value, or GAE.
enum class PpoAdvantage { ReturnMinusValue, Gae };

std::string_view to_string(AlgorithmKind kind);
std::string_view to_string(InsertionPoint point);
std::string_view to_string(CriticTarget target);
std::string_view to_string(PpoAdvantage adv);
AlgorithmKind parse_algorithm_kind(std::string_view text);
InsertionPoint parse_insertion_point(std::string_view text);
CriticTarget parse_critic_target(std::string_view text);
PpoAdvantage parse_ppo_advantage(std::string_view text);

struct AlgoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double ppo_clip = 0.2;
  int ppo_epochs = 4;
  int minibatch_size = 64;
  int batch_episodes = 4;
  InsertionPoint insertion = InsertionPoint::Returns;
  CriticTarget critic_target = CriticTarget::Normalized;
  PpoAdvantage ppo_advantage = PpoAdvantage::ReturnMinusValue;
  double value_coef = 0.01;
  double entropy_coef = 0.0;

  void validate() const;
};

/// Per-update summary appended to the run log.
struct UpdateLog {
  std::size_t samples = 0;
  double mean_signal = 0.0;       // mean policy coefficient before 1/N scaling
  double policy_objective = 0.0;  // mean surrogate / weighted log-prob at the start of the update
  double value_loss = 0.0;        // mean (V - target)^2 at collection time
  double mean_entropy = 0.0;
  double grad_norm = 0.0;         // norm of the last applied gradient (pre-clip)
};

/// PPO clipped surrogate min(rho * A, clip(rho, 1-eps, 1+eps) * A).
double ppo_surrogate(double ratio, double advantage, double clip);

/// True when the unclipped branch of the surrogate is the active one, i.e. the
/// surrogate has a non-zero gradient with respect to the ratio.
bool ppo_unclipped_active(double ratio, double advantage, double clip);

/// REINFORCE: normalize each G_t in trajectory order, ascend (1/N) sum grad log pi * G^_t.
UpdateLog reinforce_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                           const AlgoConfig& cfg);

/// Advantage G^_t - V(s_t); the value head regresses on the configured critic target.
UpdateLog actor_critic_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                              const AlgoConfig& cfg);

/// GAE advantages from raw rewards and collected values; normalizer on the
/// critic target (returns) or on the advantage stream (advantages).
UpdateLog gae_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                     const AlgoConfig& cfg);

/// Normalizes every collected value exactly once, then runs ppo_epochs of
/// shuffled minibatch ascent on the clipped surrogate minus the value loss.
UpdateLog ppo_update(std::span<Trajectory> batch, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                     const AlgoConfig& cfg, Rng& minibatch_rng);

/// Dispatches completed episodes to the configured update rule. PPO buffers
/// `batch_episodes` episodes per update; the others update once per episode.
class Agent {
public:
  Agent(AlgorithmKind kind, AlgoConfig cfg, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
        Rng minibatch_rng);

  std::optional<UpdateLog> observe_episode(Trajectory traj);
  AlgorithmKind kind() const { return kind_; }

private:
  AlgorithmKind kind_;
  AlgoConfig cfg_;
  PolicyValueNet& net_;
  Optimizer& opt_;
  Normalizer& normalizer_;
  Rng minibatch_rng_;
  std::vector<Trajectory> pending_;
};

}  // namespace kscore
