#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kscore/filter.hpp"

namespace kscore {

enum class NormalizerKind { Identity, ZScore, Kalman, KalmanAdaptive };
enum class ZScoreMode { Cumulative, Ema };

std::string_view to_string(NormalizerKind kind);
std::string_view to_string(ZScoreMode mode);
NormalizerKind parse_normalizer_kind(std::string_view text);
ZScoreMode parse_zscore_mode(std::string_view text);

/// Statistics exposed for logging. `mean`/`variance` are the running mean and
/// variance for Z-score and x_t / P_t for the Kalman variants; `r` is only set
/// for Kalman normalizers.
struct NormalizerSnapshot {
  std::uint64_t count = 0;
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> r;
};

/// Online transformer from a raw return to a normalized one.
class Normalizer {
public:
  virtual ~Normalizer() = default;

  virtual double observe(double value) = 0;
  virtual void reset() = 0;
  virtual NormalizerSnapshot snapshot() const = 0;
  virtual std::string name() const = 0;
};

class IdentityNormalizer final : public Normalizer {
public:
  double observe(double value) override;
  void reset() override { count_ = 0; }
  NormalizerSnapshot snapshot() const override { return {count_, 0.0, 0.0, std::nullopt}; }
  std::string name() const override { return "identity"; }

private:
  std::uint64_t count_ = 0;
};

/// Welford accumulator (cumulative) or exponentially weighted mean/variance (ema).
///
/// Variance uses the population convention. In ema mode `beta` is the weight
/// of the newest observation; the first observation seeds the mean exactly.
struct RunningStats {
  ZScoreMode mode = ZScoreMode::Cumulative;
  double beta = 0.01;
  std::uint64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;       // cumulative: sum of squared deviations
  double ema_var = 0.0;  // ema: exponentially weighted variance

  void push(double value);
  double variance() const;
  double stddev() const;
};

/// Updates `stats` with `value` then returns (value - mean) / (std + epsilon).
/// Throws FilterError on non-finite input.
double zscore_observe(RunningStats& stats, double value, double epsilon);

class ZScoreNormalizer final : public Normalizer {
public:
  explicit ZScoreNormalizer(double epsilon = 1e-8, ZScoreMode mode = ZScoreMode::Cumulative, double beta = 0.01);

  double observe(double value) override;
  void reset() override;
  NormalizerSnapshot snapshot() const override;
  std::string name() const override { return "zscore"; }

  const RunningStats& stats() const { return stats_; }

private:
  RunningStats stats_;
  double epsilon_;
};

/// Kalman-normalized return: update the filter with the value, then
/// emit (value - x_t) / sqrt(P_t + epsilon) from the posterior.
class KalmanNormalizer final : public Normalizer {
public:
  KalmanNormalizer(NoiseParams params, KalmanState initial, double epsilon = 1e-8,
                   std::optional<AdaptiveConfig> adaptive = std::nullopt);

  double observe(double value) override;
  void reset() override { filter_.reset(); }
  NormalizerSnapshot snapshot() const override;
  std::string name() const override { return filter_.adaptive() ? "kalman-adaptive" : "kalman"; }

  const KalmanFilter& filter() const { return filter_; }

private:
  KalmanFilter filter_;
  double epsilon_;
};

/// Normalizer choice plus every parameter any variant needs.
struct NormalizerSpec {
  NormalizerKind kind = NormalizerKind::KalmanAdaptive;
  double q = 1e-2;
  double r = 1.0;
  double alpha = 0.9;
  double r_floor = 1e-6;
  double epsilon = 1e-8;
  double x0 = 0.0;
  double p0 = 1.0;
  ZScoreMode zscore_mode = ZScoreMode::Cumulative;
  double beta = 0.01;
};

std::unique_ptr<Normalizer> make_normalizer(const NormalizerSpec& spec);

/// One point of a running-mean error curve.
struct StreamMSEReport {
  std::uint64_t t = 0;
  double empirical_mse = 0.0;
  double theoretical_mse = 0.0;  // sigma^2 / t
};

/// Monte Carlo MSE of the running sample mean on stationary streams
/// G_t = r_true + v_t, v_t ~ N(0, sigma^2), against sigma^2 / t.
/// Requires sigma > 0 and trials >= 100.
std::vector<StreamMSEReport> sample_mean_mse_curve(double sigma, std::uint64_t t_max, std::uint64_t trials,
                                                   std::uint64_t seed, double r_true = 0.0);

}  // namespace kscore
