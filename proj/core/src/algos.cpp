#include "kscore/algos.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace kscore {

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Reinforce: return "reinforce";
    case AlgorithmKind::ActorCritic: return "actor-critic";
    case AlgorithmKind::Gae: return "gae";
    case AlgorithmKind::Ppo: return "ppo";
  }
  return "unknown";
}

std::string_view to_string(InsertionPoint point) {
  return point == InsertionPoint::Returns ? "returns" : "advantages";
}

std::string_view to_string(CriticTarget target) {
  return target == CriticTarget::Normalized ? "normalized" : "raw";
}

std::string_view to_string(PpoAdvantage adv) { return adv == PpoAdvantage::Gae ? "gae" : "return"; }

AlgorithmKind parse_algorithm_kind(std::string_view text) {
  if (text == "reinforce") return AlgorithmKind::Reinforce;
  if (text == "actor-critic" || text == "ac") return AlgorithmKind::ActorCritic;
  if (text == "gae") return AlgorithmKind::Gae;
  if (text == "ppo") return AlgorithmKind::Ppo;
  throw std::invalid_argument("unknown algorithm '" + std::string(text) +
                              "' (expected reinforce, actor-critic, gae, ppo)");
}

InsertionPoint parse_insertion_point(std::string_view text) {
  if (text == "returns") return InsertionPoint::Returns;
  if (text == "advantages") return InsertionPoint::Advantages;
  throw std::invalid_argument("unknown insertion point '" + std::string(text) + "' (expected returns, advantages)");
}

CriticTarget parse_critic_target(std::string_view text) {
  if (text == "normalized") return CriticTarget::Normalized;
  if (text == "raw") return CriticTarget::Raw;
  throw std::invalid_argument("unknown critic_target '" + std::string(text) + "' (expected normalized, raw)");
}

PpoAdvantage parse_ppo_advantage(std::string_view text) {
  if (text == "return") return PpoAdvantage::ReturnMinusValue;
  if (text == "gae") return PpoAdvantage::Gae;
  throw std::invalid_argument("unknown ppo_advantage '" + std::string(text) + "' (expected return, gae)");
}

void AlgoConfig::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw std::invalid_argument("gae_lambda must lie in [0, 1]");
  if (!(ppo_clip > 0.0)) throw std::invalid_argument("ppo_clip must be > 0");
  if (ppo_epochs < 0) throw std::invalid_argument("ppo_epochs must be >= 0");
  if (minibatch_size <= 0) throw std::invalid_argument("minibatch_size must be > 0");
  if (batch_episodes <= 0) throw std::invalid_argument("batch_episodes must be > 0");
  if (!(value_coef >= 0.0)) throw std::invalid_argument("value_coef must be >= 0");
  if (!(entropy_coef >= 0.0)) throw std::invalid_argument("entropy_coef must be >= 0");
}

double ppo_surrogate(double ratio, double advantage, double clip) {
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

bool ppo_unclipped_active(double ratio, double advantage, double clip) {
  if (advantage >= 0.0) return ratio <= 1.0 + clip;
  return ratio >= 1.0 - clip;
}

namespace {

struct Signals {
  std::vector<double> critic_target;  // empty when the critic is not trained
  std::vector<double> policy_signal;
};

std::vector<double> normalize_stream(Normalizer& normalizer, const std::vector<double>& values) {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(normalizer.observe(v));
  return out;
}

// Computes the critic target and policy coefficient for one episode. Every
// value enters the normalizer once, in ascending t.
Signals prepare(Trajectory& traj, AlgorithmKind kind, Normalizer& normalizer, const AlgoConfig& cfg) {
  const std::size_t n = traj.size();
  traj.returns = trajectory_returns(traj, cfg.gamma);
  Signals s;

  const bool use_gae =
      kind == AlgorithmKind::Gae || (kind == AlgorithmKind::Ppo && cfg.ppo_advantage == PpoAdvantage::Gae);

  if (kind == AlgorithmKind::Reinforce) {
    traj.advantages = traj.returns;
    traj.normalized = normalize_stream(normalizer, traj.returns);
    s.policy_signal = traj.normalized;
    return s;
  }

  if (cfg.insertion == InsertionPoint::Returns) {
    traj.normalized = normalize_stream(normalizer, traj.returns);
    const bool normalized_critic = cfg.critic_target == CriticTarget::Normalized;
    s.critic_target = normalized_critic ? traj.normalized : traj.returns;
    if (use_gae) {
      traj.advantages = gae_advantages(traj, cfg.gamma, cfg.gae_lambda);
    } else {
      traj.advantages.resize(n);
      for (std::size_t t = 0; t < n; ++t) {
        // A raw-scale critic is not a baseline for a normalized return.
        traj.advantages[t] = traj.normalized[t] - (normalized_critic ? traj.values[t] : 0.0);
      }
    }
    s.policy_signal = traj.advantages;
    return s;
  }

  // Advantage insertion: the critic stays on raw returns.
  s.critic_target = traj.returns;
  if (use_gae) {
    traj.advantages = gae_advantages(traj, cfg.gamma, cfg.gae_lambda);
  } else {
    traj.advantages.resize(n);
    for (std::size_t t = 0; t < n; ++t) traj.advantages[t] = traj.returns[t] - traj.values[t];
  }
  traj.normalized = normalize_stream(normalizer, traj.advantages);
  s.policy_signal = traj.normalized;
  return s;
}

UpdateLog single_episode_update(Trajectory& traj, AlgorithmKind kind, PolicyValueNet& net, Optimizer& opt,
                                Normalizer& normalizer, const AlgoConfig& cfg) {
  cfg.validate();
  const std::size_t n = traj.size();
  if (n == 0) throw std::invalid_argument("cannot update from an empty trajectory");
  const Signals s = prepare(traj, kind, normalizer, cfg);
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool critic = !s.critic_target.empty();

  UpdateLog log;
  log.samples = n;
  GradientBuffer grad = net.make_gradient_buffer();
  for (std::size_t t = 0; t < n; ++t) {
    const ForwardResult f = net.forward(traj.observations[t]);
    const LogProbEntropy le = log_prob_and_entropy(f.probs, traj.actions[t]);
    BackwardCoefficients c;
    c.policy_coef = s.policy_signal[t] * inv_n;
    c.entropy_coef = cfg.entropy_coef * inv_n;
    if (critic) {
      c.value_coef = cfg.value_coef * inv_n;
      c.value_target = s.critic_target[t];
      const double dv = f.value - c.value_target;
      log.value_loss += dv * dv * inv_n;
    }
    net.backward(traj.observations[t], f, traj.actions[t], c, grad);
    log.mean_signal += s.policy_signal[t] * inv_n;
    log.policy_objective += s.policy_signal[t] * le.log_prob * inv_n;
    log.mean_entropy += le.entropy * inv_n;
  }
  log.grad_norm = grad.norm();
  opt.apply_update(net, grad);
  return log;
}

}  // namespace

UpdateLog reinforce_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                           const AlgoConfig& cfg) {
  return single_episode_update(traj, AlgorithmKind::Reinforce, net, opt, normalizer, cfg);
}

UpdateLog actor_critic_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                              const AlgoConfig& cfg) {
  return single_episode_update(traj, AlgorithmKind::ActorCritic, net, opt, normalizer, cfg);
}

UpdateLog gae_update(Trajectory& traj, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                     const AlgoConfig& cfg) {
  return single_episode_update(traj, AlgorithmKind::Gae, net, opt, normalizer, cfg);
}

UpdateLog ppo_update(std::span<Trajectory> batch, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
                     const AlgoConfig& cfg, Rng& minibatch_rng) {
  cfg.validate();

  struct Sample {
    const Observation* obs;
    int action;
    double old_log_prob;
    double advantage;
    double target;
  };
  std::vector<Sample> samples;
  bool critic = true;
  for (Trajectory& traj : batch) {
    const Signals s = prepare(traj, AlgorithmKind::Ppo, normalizer, cfg);
    critic = !s.critic_target.empty();
    for (std::size_t t = 0; t < traj.size(); ++t) {
      samples.push_back({&traj.observations[t], traj.actions[t], traj.log_probs[t], s.policy_signal[t],
                         critic ? s.critic_target[t] : 0.0});
    }
  }

  UpdateLog log;
  log.samples = samples.size();
  if (samples.empty()) return log;

  const double inv_total = 1.0 / static_cast<double>(samples.size());
  for (const Sample& s : samples) {
    log.mean_signal += s.advantage * inv_total;
    log.policy_objective += s.advantage * inv_total;  // surrogate at ratio 1
  }
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  GradientBuffer grad = net.make_gradient_buffer();
  const std::size_t mb = static_cast<std::size_t>(cfg.minibatch_size);

  for (int epoch = 0; epoch < cfg.ppo_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), minibatch_rng.engine());
    for (std::size_t start = 0; start < order.size(); start += mb) {
      const std::size_t end = std::min(order.size(), start + mb);
      const double inv_m = 1.0 / static_cast<double>(end - start);
      double entropy = 0.0;
      double value_loss = 0.0;
      for (std::size_t k = start; k < end; ++k) {
        const Sample& s = samples[order[k]];
        const ForwardResult f = net.forward(*s.obs);
        const LogProbEntropy le = log_prob_and_entropy(f.probs, s.action);
        const double ratio = std::exp(le.log_prob - s.old_log_prob);
        BackwardCoefficients c;
        c.policy_coef = ppo_unclipped_active(ratio, s.advantage, cfg.ppo_clip) ? s.advantage * ratio * inv_m : 0.0;
        c.entropy_coef = cfg.entropy_coef * inv_m;
        if (critic) {
          c.value_coef = cfg.value_coef * inv_m;
          c.value_target = s.target;
          value_loss += (f.value - s.target) * (f.value - s.target) * inv_m;
        }
        entropy += le.entropy * inv_m;
        net.backward(*s.obs, f, s.action, c, grad);
      }
      if (epoch == 0 && start == 0) {
        log.value_loss = value_loss;
        log.mean_entropy = entropy;
      }
      log.grad_norm = grad.norm();
      opt.apply_update(net, grad);
    }
  }
  return log;
}

Agent::Agent(AlgorithmKind kind, AlgoConfig cfg, PolicyValueNet& net, Optimizer& opt, Normalizer& normalizer,
             Rng minibatch_rng)
    : kind_(kind), cfg_(cfg), net_(net), opt_(opt), normalizer_(normalizer), minibatch_rng_(minibatch_rng) {
  cfg_.validate();
}

std::optional<UpdateLog> Agent::observe_episode(Trajectory traj) {
  switch (kind_) {
    case AlgorithmKind::Reinforce: return reinforce_update(traj, net_, opt_, normalizer_, cfg_);
    case AlgorithmKind::ActorCritic: return actor_critic_update(traj, net_, opt_, normalizer_, cfg_);
    case AlgorithmKind::Gae: return gae_update(traj, net_, opt_, normalizer_, cfg_);
    case AlgorithmKind::Ppo:
      pending_.push_back(std::move(traj));
      if (static_cast<int>(pending_.size()) < cfg_.batch_episodes) return std::nullopt;
      {
        UpdateLog log = ppo_update(pending_, net_, opt_, normalizer_, cfg_, minibatch_rng_);
        pending_.clear();
        return log;
      }
  }
  return std::nullopt;
}

}  // namespace kscore
