#include "kscore/normalizers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "kscore/rng.hpp"

namespace kscore {

std::string_view to_string(NormalizerKind kind) {
  switch (kind) {
    case NormalizerKind::Identity: return "identity";
    case NormalizerKind::ZScore: return "zscore";
    case NormalizerKind::Kalman: return "kalman";
    case NormalizerKind::KalmanAdaptive: return "kalman-adaptive";
  }
  return "unknown";
}

std::string_view to_string(ZScoreMode mode) {
  return mode == ZScoreMode::Cumulative ? "cumulative" : "ema";
}

NormalizerKind parse_normalizer_kind(std::string_view text) {
  if (text == "identity") return NormalizerKind::Identity;
  if (text == "zscore") return NormalizerKind::ZScore;
  if (text == "kalman") return NormalizerKind::Kalman;
  if (text == "kalman-adaptive") return NormalizerKind::KalmanAdaptive;
  throw std::invalid_argument("unknown normalizer '" + std::string(text) +
                              "' (expected identity, zscore, kalman, kalman-adaptive)");
}

ZScoreMode parse_zscore_mode(std::string_view text) {
  if (text == "cumulative") return ZScoreMode::Cumulative;
  if (text == "ema") return ZScoreMode::Ema;
  throw std::invalid_argument("unknown zscore_mode '" + std::string(text) + "' (expected cumulative, ema)");
}

double IdentityNormalizer::observe(double value) {
  ++count_;
  return value;
}

void RunningStats::push(double value) {
  ++count;
  if (mode == ZScoreMode::Cumulative) {
    const double delta = value - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (value - mean);
    return;
  }
  if (count == 1) {
    mean = value;
    ema_var = 0.0;
    return;
  }
  const double delta = value - mean;
  const double incr = beta * delta;
  mean += incr;
  ema_var = (1.0 - beta) * (ema_var + delta * incr);
}

double RunningStats::variance() const {
  if (count == 0) return 0.0;
  if (mode == ZScoreMode::Ema) return ema_var;
  return m2 / static_cast<double>(count);
}

double RunningStats::stddev() const { return std::sqrt(variance()); }

double zscore_observe(RunningStats& stats, double value, double epsilon) {
  if (!std::isfinite(value)) {
    throw FilterError("zscore normalizer received a non-finite value");
  }
  stats.push(value);
  return (value - stats.mean) / (stats.stddev() + epsilon);
}

ZScoreNormalizer::ZScoreNormalizer(double epsilon, ZScoreMode mode, double beta) : epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (mode == ZScoreMode::Ema && !(beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("ema beta must lie in (0, 1]");
  }
  stats_.mode = mode;
  stats_.beta = beta;
}

double ZScoreNormalizer::observe(double value) { return zscore_observe(stats_, value, epsilon_); }

void ZScoreNormalizer::reset() {
  RunningStats fresh;
  fresh.mode = stats_.mode;
  fresh.beta = stats_.beta;
  stats_ = fresh;
}

NormalizerSnapshot ZScoreNormalizer::snapshot() const {
  return {stats_.count, stats_.mean, stats_.variance(), std::nullopt};
}

KalmanNormalizer::KalmanNormalizer(NoiseParams params, KalmanState initial, double epsilon,
                                   std::optional<AdaptiveConfig> adaptive)
    : filter_(params, initial, adaptive), epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
}

double KalmanNormalizer::observe(double value) {
  filter_.observe(value);
  return normalize(filter_.state(), value, epsilon_);
}

NormalizerSnapshot KalmanNormalizer::snapshot() const {
  const auto& s = filter_.state();
  return {s.t, s.x, s.p, filter_.params().r};
}

std::unique_ptr<Normalizer> make_normalizer(const NormalizerSpec& spec) {
  switch (spec.kind) {
    case NormalizerKind::Identity:
      return std::make_unique<IdentityNormalizer>();
    case NormalizerKind::ZScore:
      return std::make_unique<ZScoreNormalizer>(spec.epsilon, spec.zscore_mode, spec.beta);
    case NormalizerKind::Kalman:
      return std::make_unique<KalmanNormalizer>(NoiseParams{spec.q, spec.r}, KalmanState{spec.x0, spec.p0, 0},
                                                spec.epsilon);
    case NormalizerKind::KalmanAdaptive:
      return std::make_unique<KalmanNormalizer>(NoiseParams{spec.q, spec.r}, KalmanState{spec.x0, spec.p0, 0},
                                                spec.epsilon, AdaptiveConfig{spec.alpha, spec.r, spec.r_floor});
  }
  throw std::invalid_argument("unhandled normalizer kind");
}

std::vector<StreamMSEReport> sample_mean_mse_curve(double sigma, std::uint64_t t_max, std::uint64_t trials,
                                                   std::uint64_t seed, double r_true) {
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  if (trials < 100) throw std::invalid_argument("sample_mean_mse_curve needs at least 100 trials");

  std::vector<double> sq_err(t_max, 0.0);
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    Rng rng(seed, streams::kStreamNoise, trial);
    double sum = 0.0;
    for (std::uint64_t t = 1; t <= t_max; ++t) {
      sum += r_true + sigma * rng.standard_normal();
      const double err = sum / static_cast<double>(t) - r_true;
      sq_err[t - 1] += err * err;
    }
  }

  std::vector<StreamMSEReport> out;
  out.reserve(t_max);
  for (std::uint64_t t = 1; t <= t_max; ++t) {
    out.push_back({t, sq_err[t - 1] / static_cast<double>(trials), sigma * sigma / static_cast<double>(t)});
  }
  return out;
}

}  // namespace kscore
