#include <cmath>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "kscore/normalizers.hpp"
#include "kscore/reward_stream.hpp"
#include "kscore/rng.hpp"

using namespace kscore;

namespace {

// Brute-force population statistics over the full history.
double brute_zscore(const std::vector<double>& history, double eps) {
  const double n = static_cast<double>(history.size());
  const double mean = std::accumulate(history.begin(), history.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : history) ss += (v - mean) * (v - mean);
  return (history.back() - mean) / (std::sqrt(ss / n) + eps);
}

std::vector<double> replay(Normalizer& n, const std::vector<double>& xs) {
  std::vector<double> out;
  for (double x : xs) out.push_back(n.observe(x));
  return out;
}

std::vector<double> random_sequence(std::uint64_t seed, int n) {
  Rng rng(seed);
  std::vector<double> xs;
  for (int i = 0; i < n; ++i) xs.push_back(rng.normal(20.0, 15.0));
  return xs;
}

}  // namespace

TEST(ZScore, WorkedExamples) {
  ZScoreNormalizer z;
  EXPECT_EQ(z.observe(1.0), 0.0);
  z.observe(2.0);
  EXPECT_NEAR(z.observe(3.0), 1.0 / 0.8164966, 1e-6);

  ZScoreNormalizer c;
  for (int i = 0; i < 10; ++i) EXPECT_EQ(c.observe(4.25), 0.0);
}

TEST(ZScore, MatchesBruteForce) {
  const auto xs = random_sequence(1, 300);
  ZScoreNormalizer z;
  std::vector<double> history;
  for (double x : xs) {
    history.push_back(x);
    const double got = z.observe(x);
    if (history.size() == 1) {
      EXPECT_EQ(got, 0.0);
    } else {
      EXPECT_NEAR(got, brute_zscore(history, 1e-8), 1e-9);
    }
  }
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
  EXPECT_NEAR(z.stats().mean, mean, 1e-9 * std::abs(mean));
}

TEST(ZScore, ShiftEquivariance) {
  const auto xs = random_sequence(2, 500);
  std::vector<double> shifted;
  for (double x : xs) shifted.push_back(x + 1234.5);
  ZScoreNormalizer a, b;
  const auto oa = replay(a, xs);
  const auto ob = replay(b, shifted);
  for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(oa[i], ob[i], 1e-9);
}

TEST(ZScore, EmaWeightsNewestByBeta) {
  RunningStats s{ZScoreMode::Ema, 0.25};
  s.push(4.0);
  EXPECT_EQ(s.mean, 4.0);
  EXPECT_EQ(s.variance(), 0.0);
  s.push(8.0);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  // West's EW variance: (1 - beta) * (var + beta * delta^2)
  EXPECT_DOUBLE_EQ(s.variance(), 0.75 * (0.0 + 0.25 * 16.0));
}

TEST(ZScore, RejectsNonFinite) {
  ZScoreNormalizer z;
  EXPECT_THROW(z.observe(std::nan("")), FilterError);
}

TEST(Kalman, WorkedExamples) {
  KalmanNormalizer k({0.0, 1.0}, {0.0, 1.0, 0});
  EXPECT_NEAR(k.observe(2.0), 1.41421, 1e-5);

  KalmanNormalizer k0({0.3, 2.0}, {6.0, 1.0, 0});
  EXPECT_EQ(k0.observe(6.0), 0.0);

  KalmanNormalizer ka({0.0, 1.0}, {0.0, 1.0, 0}, 1e-8, AdaptiveConfig{0.9, 1.0, 1e-6});
  const double p = 1.3 / 2.3;
  const double expected = (2.0 - 2.0 / 2.3) / std::sqrt(p + 1e-8);
  EXPECT_NEAR(ka.observe(2.0), expected, 1e-12);
  EXPECT_DOUBLE_EQ(*ka.snapshot().r, 1.3);
}

TEST(Identity, PassesThrough) {
  IdentityNormalizer n;
  EXPECT_EQ(n.observe(5.0), 5.0);
  EXPECT_EQ(n.observe(-3.2), -3.2);
  EXPECT_EQ(n.observe(0.0), 0.0);
  EXPECT_EQ(n.snapshot().count, 3u);
}

TEST(Normalizers, DeterministicReplayAndReset) {
  const auto xs = random_sequence(3, 200);
  for (auto kind : {NormalizerKind::Identity, NormalizerKind::ZScore, NormalizerKind::Kalman,
                    NormalizerKind::KalmanAdaptive}) {
    NormalizerSpec spec;
    spec.kind = kind;
    auto a = make_normalizer(spec);
    auto b = make_normalizer(spec);
    const auto oa = replay(*a, xs);
    const auto ob = replay(*b, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      EXPECT_EQ(oa[i], ob[i]);
      EXPECT_TRUE(std::isfinite(oa[i]));
    }
    a->reset();
    EXPECT_EQ(replay(*a, xs), oa) << a->name();
  }
}

TEST(Normalizers, KindRoundTrip) {
  for (auto kind : {NormalizerKind::Identity, NormalizerKind::ZScore, NormalizerKind::Kalman,
                    NormalizerKind::KalmanAdaptive}) {
    EXPECT_EQ(parse_normalizer_kind(to_string(kind)), kind);
    NormalizerSpec spec;
    spec.kind = kind;
    EXPECT_EQ(make_normalizer(spec)->name(), to_string(kind));
  }
  EXPECT_THROW(parse_normalizer_kind("popart"), std::invalid_argument);
}

TEST(Normalizers, KalmanTracksDriftBetterThanSampleMean) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto stream = reward_stream_generate({0.01, 1.0, 0.0, 2000, seed});
    KalmanNormalizer k({0.01, 1.0}, {0.0, 1.0, 0});
    RunningStats s;
    double ek = 0.0, es = 0.0;
    for (std::size_t t = 0; t < stream.observations.size(); ++t) {
      k.observe(stream.observations[t]);
      s.push(stream.observations[t]);
      ek += std::pow(k.snapshot().mean - stream.latent[t], 2);
      es += std::pow(s.mean - stream.latent[t], 2);
    }
    wins += ek < es;
  }
  EXPECT_GE(wins, 95);
}

TEST(SampleMeanMse, TheoreticalCurve) {
  const auto a = sample_mean_mse_curve(1.0, 100, 10000, 1);
  EXPECT_DOUBLE_EQ(a.front().theoretical_mse, 1.0);
  EXPECT_NEAR(a[99].empirical_mse, 0.01, 0.001);
  for (std::size_t i = 1; i < a.size(); ++i) EXPECT_LT(a[i].theoretical_mse, a[i - 1].theoretical_mse);
  const auto b = sample_mean_mse_curve(2.0, 4, 100, 1);
  EXPECT_DOUBLE_EQ(b[3].theoretical_mse, 1.0);
  EXPECT_THROW(sample_mean_mse_curve(1.0, 10, 99, 1), std::invalid_argument);
  EXPECT_THROW(sample_mean_mse_curve(0.0, 10, 100, 1), std::invalid_argument);
}
