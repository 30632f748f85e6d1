#include "kscore/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace kscore {

double RunConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return algorithm == AlgorithmKind::Ppo ? 3e-4 : 1e-3;
}

OptimizerConfig RunConfig::effective_optimizer() const {
  OptimizerConfig o = optimizer;
  o.learning_rate = effective_learning_rate();
  return o;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("invalid config: " + msg); };
  if (train_seed == eval_seed) fail("train_seed and eval_seed must differ");
  if (hidden <= 0) fail("hidden must be > 0");
  if (eval_window <= 0) fail("eval_window must be > 0");
  if (eval_every <= 0) fail("eval_every must be > 0");
  if (max_episodes < 0) fail("max_episodes must be >= 0");
  try {
    algo.validate();
    effective_optimizer().validate();
    if (normalizer.kind == NormalizerKind::Kalman || normalizer.kind == NormalizerKind::KalmanAdaptive) {
      NoiseParams{normalizer.q, normalizer.r}.validate();
      if (!(normalizer.p0 > 0.0)) fail("p0 must be > 0");
    }
    if (!(normalizer.epsilon > 0.0)) fail("epsilon must be > 0");
    if (normalizer.kind == NormalizerKind::KalmanAdaptive) {
      AdaptiveConfig{normalizer.alpha, normalizer.r, normalizer.r_floor}.validate();
    }
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["env"] = c.env;
  j["algorithm"] = std::string(to_string(c.algorithm));
  j["normalizer"] = std::string(to_string(c.normalizer.kind));
  j["q"] = c.normalizer.q;
  j["r"] = c.normalizer.r;
  j["alpha"] = c.normalizer.alpha;
  j["r_floor"] = c.normalizer.r_floor;
  j["epsilon"] = c.normalizer.epsilon;
  j["x0"] = c.normalizer.x0;
  j["p0"] = c.normalizer.p0;
  j["zscore_mode"] = std::string(to_string(c.normalizer.zscore_mode));
  j["beta"] = c.normalizer.beta;
  j["gamma"] = c.algo.gamma;
  j["gae_lambda"] = c.algo.gae_lambda;
  j["ppo_clip"] = c.algo.ppo_clip;
  j["ppo_epochs"] = c.algo.ppo_epochs;
  j["minibatch_size"] = c.algo.minibatch_size;
  j["batch_episodes"] = c.algo.batch_episodes;
  j["insertion"] = std::string(to_string(c.algo.insertion));
  j["critic_target"] = std::string(to_string(c.algo.critic_target));
  j["ppo_advantage"] = std::string(to_string(c.algo.ppo_advantage));
  j["value_coef"] = c.algo.value_coef;
  j["entropy_coef"] = c.algo.entropy_coef;
  j["hidden"] = c.hidden;
  j["optimizer"] = std::string(to_string(c.optimizer.kind));
  j["lr"] = c.effective_learning_rate();
  j["adam_beta1"] = c.optimizer.adam_beta1;
  j["adam_beta2"] = c.optimizer.adam_beta2;
  j["adam_eps"] = c.optimizer.adam_epsilon;
  j["clip_norm"] = c.optimizer.clip_norm ? nlohmann::json(*c.optimizer.clip_norm) : nlohmann::json(nullptr);
  j["train_seed"] = c.train_seed;
  j["eval_seed"] = c.eval_seed;
  j["reward_threshold"] = c.reward_threshold ? nlohmann::json(*c.reward_threshold) : nlohmann::json(nullptr);
  j["eval_window"] = c.eval_window;
  j["eval_every"] = c.eval_every;
  j["max_episodes"] = c.max_episodes;
  j["eval_policy"] = c.eval_policy == ActionSelection::Greedy ? "greedy" : "sampled";
  j["output"] = c.output;
  return j;
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

template <typename T>
void read_optional(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) {
    out.reset();
    return;
  }
  T v{};
  read(j, key, v);
  out = v;
}

template <typename Enum, typename Parser>
void read_enum(const nlohmann::json& j, const char* key, Enum& out, Parser parse) {
  if (!j.contains(key)) return;
  std::string text;
  read(j, key, text);
  try {
    out = parse(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("config key '" + std::string(key) + "': " + e.what());
  }
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    const nlohmann::json defaults = to_json(RunConfig{});
    for (const auto& [key, _] : defaults.items()) k.insert(key);
    return k;
  }();
  return keys;
}

}  // namespace

RunConfig run_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("run config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known_keys().contains(key)) throw ConfigError("unknown config key '" + key + "'");
  }
  RunConfig c;
  read(j, "env", c.env);
  read_enum(j, "algorithm", c.algorithm, parse_algorithm_kind);
  read_enum(j, "normalizer", c.normalizer.kind, parse_normalizer_kind);
  read(j, "q", c.normalizer.q);
  read(j, "r", c.normalizer.r);
  read(j, "alpha", c.normalizer.alpha);
  read(j, "r_floor", c.normalizer.r_floor);
  read(j, "epsilon", c.normalizer.epsilon);
  read(j, "x0", c.normalizer.x0);
  read(j, "p0", c.normalizer.p0);
  read_enum(j, "zscore_mode", c.normalizer.zscore_mode, parse_zscore_mode);
  read(j, "beta", c.normalizer.beta);
  read(j, "gamma", c.algo.gamma);
  read(j, "gae_lambda", c.algo.gae_lambda);
  read(j, "ppo_clip", c.algo.ppo_clip);
  read(j, "ppo_epochs", c.algo.ppo_epochs);
  read(j, "minibatch_size", c.algo.minibatch_size);
  read(j, "batch_episodes", c.algo.batch_episodes);
  read_enum(j, "insertion", c.algo.insertion, parse_insertion_point);
  read_enum(j, "critic_target", c.algo.critic_target, parse_critic_target);
  read_enum(j, "ppo_advantage", c.algo.ppo_advantage, parse_ppo_advantage);
  read(j, "value_coef", c.algo.value_coef);
  read(j, "entropy_coef", c.algo.entropy_coef);
  read(j, "hidden", c.hidden);
  read_enum(j, "optimizer", c.optimizer.kind, parse_optimizer_kind);
  read_optional(j, "lr", c.learning_rate);
  read(j, "adam_beta1", c.optimizer.adam_beta1);
  read(j, "adam_beta2", c.optimizer.adam_beta2);
  read(j, "adam_eps", c.optimizer.adam_epsilon);
  read_optional(j, "clip_norm", c.optimizer.clip_norm);
  read(j, "train_seed", c.train_seed);
  read(j, "eval_seed", c.eval_seed);
  read_optional(j, "reward_threshold", c.reward_threshold);
  read(j, "eval_window", c.eval_window);
  read(j, "eval_every", c.eval_every);
  read(j, "max_episodes", c.max_episodes);
  read_enum(j, "eval_policy", c.eval_policy, [](std::string_view s) {
    if (s == "greedy") return ActionSelection::Greedy;
    if (s == "sampled") return ActionSelection::Sample;
    throw std::invalid_argument("expected greedy or sampled");
  });
  read(j, "output", c.output);
  c.validate();
  return c;
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // translate the byte offset into line:column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": malformed JSON (byte " + std::to_string(e.byte) + ")");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) { return run_config_from_json(read_json_file(path)); }

void apply_override(nlohmann::json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' is not KEY=VALUE");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const auto dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
    if (dot == std::string::npos) {
      (*node)[part] = value;
      break;
    }
    node = &(*node)[part];
    pos = dot + 1;
  }
}

std::string config_hash(const RunConfig& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("output");
  const std::string canonical = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace kscore
