#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "kscore/checkpoint.hpp"
#include "kscore/gradient_check.hpp"
#include "kscore/optimizer.hpp"
#include "kscore/policy_net.hpp"
#include "kscore/rng.hpp"

using namespace kscore;

namespace {

OptimizerConfig optimizer(OptimizerKind kind, double lr) {
  OptimizerConfig c;
  c.kind = kind;
  c.learning_rate = lr;
  return c;
}
OptimizerConfig sgd(double lr) { return optimizer(OptimizerKind::Sgd, lr); }
OptimizerConfig adam(double lr) { return optimizer(OptimizerKind::Adam, lr); }

Eigen::VectorXd obs4() {
  Eigen::VectorXd o(4);
  o << 0.1, -0.2, 0.03, 0.4;
  return o;
}

}  // namespace

TEST(PolicyNet, ParameterCount) {
  EXPECT_EQ((NetShape{4, 64, 2}).parameter_count(), 4 * 64 + 64 + 64 * 64 + 64 + 64 * 2 + 2 + 64 + 1);
  EXPECT_EQ(PolicyValueNet::initialized({3, 5, 4}, 1).parameters().size(), (NetShape{3, 5, 4}).parameter_count());
}

TEST(PolicyNet, ZeroWeightsGiveUniformPolicy) {
  PolicyValueNet net({4, 8, 3});
  const auto f = net.forward(obs4());
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(f.probs[i], 1.0 / 3.0);
  EXPECT_EQ(f.value, 0.0);
}

TEST(PolicyNet, ProbabilitiesAreADistribution) {
  Rng rng(1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto net = PolicyValueNet::initialized({4, 16, 5}, seed);
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i) net.parameters()[i] += rng.normal(0.0, 2.0);
    Eigen::VectorXd o(4);
    for (int k = 0; k < 4; ++k) o[k] = rng.normal(0.0, 3.0);
    const auto f = net.forward(o);
    EXPECT_NEAR(f.probs.sum(), 1.0, 1e-12);
    EXPECT_GT(f.probs.minCoeff(), 0.0);
  }
}

TEST(PolicyNet, SeededInitRegression) {
  const auto net = PolicyValueNet::initialized({4, 64, 2}, 42);
  const auto f = net.forward(obs4());
  EXPECT_NEAR(f.logits[0], -0.00046862200522087714, 1e-15);
  EXPECT_NEAR(f.logits[1], -0.00021514110604504952, 1e-15);
  EXPECT_NEAR(f.probs[0], 0.49993662977554537, 1e-14);
  EXPECT_NEAR(f.value, -0.016863795693739962, 1e-14);
  EXPECT_EQ(PolicyValueNet::initialized({4, 64, 2}, 42).parameters(), net.parameters());
  EXPECT_NE(PolicyValueNet::initialized({4, 64, 2}, 43).parameters(), net.parameters());
}

TEST(PolicyNet, InitTrunkIsOrthogonal) {
  const auto net = PolicyValueNet::initialized({4, 64, 2}, 3);
  const Eigen::Map<const Eigen::MatrixXd> w2(net.parameters().data() + 4 * 64 + 64, 64, 64);
  EXPECT_TRUE((w2.transpose() * w2).isApprox(Eigen::MatrixXd::Identity(64, 64), 1e-10));
}

TEST(PolicyNet, ForwardErrors) {
  auto net = PolicyValueNet::initialized({4, 8, 2}, 0);
  EXPECT_THROW(net.forward(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  net.parameters()[0] = std::nan("");
  EXPECT_THROW(net.forward(obs4()), DivergenceError);
}

TEST(Softmax, TranslationInvariance) {
  Eigen::VectorXd z(4);
  z << 0.3, -1.2, 2.5, 0.0;
  const auto p = softmax(z);
  const auto q = softmax(z.array() + 17.25);
  EXPECT_LT((p - q).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::VectorXd big(2);
  big << 1000.0, 0.0;
  EXPECT_TRUE(softmax(big).allFinite());
}

TEST(LogProbEntropy, WorkedExamples) {
  Eigen::VectorXd u(2);
  u << 0.5, 0.5;
  auto r = log_prob_and_entropy(u, 0);
  EXPECT_DOUBLE_EQ(r.log_prob, std::log(0.5));
  EXPECT_DOUBLE_EQ(r.entropy, std::log(2.0));

  Eigen::VectorXd d(2);
  d << 1.0 - 1e-12, 1e-12;
  EXPECT_NEAR(log_prob_and_entropy(d, 0).entropy, 0.0, 1e-10);

  Eigen::VectorXd p(2);
  p << 0.25, 0.75;
  r = log_prob_and_entropy(p, 1);
  EXPECT_DOUBLE_EQ(r.log_prob, std::log(0.75));
  EXPECT_NEAR(r.entropy, -(0.25 * std::log(0.25) + 0.75 * std::log(0.75)), 1e-15);
}

TEST(Backward, ZeroCoefficientsContributeNothing) {
  const auto net = PolicyValueNet::initialized({4, 16, 2}, 5);
  auto g = net.make_gradient_buffer();
  net.accumulate(obs4(), 1, {}, g);
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(Backward, LinearInCoefficients) {
  const auto net = PolicyValueNet::initialized({4, 16, 3}, 6);
  const BackwardCoefficients c{0.7, 0.3, 0.05, 1.5};
  const BackwardCoefficients c2{1.4, 0.6, 0.1, 1.5};
  auto g1 = net.make_gradient_buffer();
  auto g2 = net.make_gradient_buffer();
  net.accumulate(obs4(), 2, c, g1);
  net.accumulate(obs4(), 2, c2, g2);
  EXPECT_EQ(g2.values, 2.0 * g1.values);
}

TEST(Backward, AccumulatesAcrossCalls) {
  const auto net = PolicyValueNet::initialized({4, 16, 2}, 7);
  const BackwardCoefficients c{1.0, 0.5, 0.0, 0.2};
  auto once = net.make_gradient_buffer();
  auto twice = net.make_gradient_buffer();
  net.accumulate(obs4(), 0, c, once);
  net.accumulate(obs4(), 0, c, twice);
  net.accumulate(obs4(), 0, c, twice);
  EXPECT_TRUE(twice.values.isApprox(2.0 * once.values, 1e-15));
  EXPECT_THROW(net.accumulate(obs4(), 0, {std::nan(""), 0.0, 0.0, 0.0}, once), DivergenceError);
}

TEST(Backward, MatchesFiniteDifferences) {
  const auto result = gradient_check(50, 2024);
  EXPECT_EQ(result.cases, 50);
  EXPECT_GT(result.entries, 0);
  EXPECT_LT(result.max_relative_error, 1e-4);
}

TEST(Backward, FullSizeNetMatchesFiniteDifferences) {
  auto net = PolicyValueNet::initialized({4, 64, 2}, 8);
  EXPECT_LT(max_gradient_error(net, obs4(), 1, {0.8, 0.5, 0.01, 3.0}), 1e-4);
}

TEST(GradientRelativeError, FloorAvoidsZeroOverZero) {
  EXPECT_EQ(gradient_relative_error(0.0, 0.0), 0.0);
  EXPECT_EQ(gradient_relative_error(1e-12, -1e-12), 0.0);
  EXPECT_NEAR(gradient_relative_error(1.0, 1.1), 0.1 / 1.1, 1e-12);
}

TEST(Optimizer, ZeroBufferLeavesParameters) {
  for (auto kind : {OptimizerKind::Sgd, OptimizerKind::Adam}) {
    auto net = PolicyValueNet::initialized({4, 8, 2}, 1);
    const Eigen::VectorXd before = net.parameters();
    Optimizer opt(optimizer(kind, 0.1));
    auto g = net.make_gradient_buffer();
    opt.apply_update(net, g);
    EXPECT_EQ(net.parameters(), before);
  }
}

TEST(Optimizer, SgdAscentStep) {
  PolicyValueNet net({1, 1, 2});
  Optimizer opt(sgd(0.1));
  auto g = net.make_gradient_buffer();
  g.values[0] = 2.0;
  opt.apply_update(net, g);
  EXPECT_DOUBLE_EQ(net.parameters()[0], 0.2);
  EXPECT_EQ(g.norm(), 0.0);
  EXPECT_EQ(opt.steps(), 1);
}

TEST(Optimizer, ClipNorm) {
  PolicyValueNet net({2, 2, 2});
  OptimizerConfig cfg = sgd(0.5);
  cfg.clip_norm = 1.0;
  Optimizer opt(cfg);
  auto g = net.make_gradient_buffer();
  g.values[0] = 6.0;
  g.values[3] = 8.0;
  opt.apply_update(net, g);
  EXPECT_NEAR(net.parameters().norm(), 0.5, 1e-15);
}

TEST(Optimizer, AdamFirstStepIsSignTimesLr) {
  PolicyValueNet net({1, 1, 2});
  Optimizer opt(adam(0.01));
  auto g = net.make_gradient_buffer();
  g.values[0] = 3.0;
  g.values[1] = -0.5;
  opt.apply_update(net, g);
  EXPECT_NEAR(net.parameters()[0], 0.01, 1e-9);
  EXPECT_NEAR(net.parameters()[1], -0.01, 1e-9);
}

TEST(Optimizer, Validation) {
  EXPECT_THROW(sgd(0.0).validate(), std::invalid_argument);
  EXPECT_THROW(parse_optimizer_kind("rmsprop"), std::invalid_argument);
  EXPECT_EQ(parse_optimizer_kind("adam"), OptimizerKind::Adam);
}

TEST(Checkpoint, RoundTrip) {
  const auto net = PolicyValueNet::initialized({4, 16, 3}, 9);
  const auto path = std::filesystem::temp_directory_path() / "kscore_ckpt_test.bin";
  save_checkpoint(path, net, "abc123");
  EXPECT_EQ(std::filesystem::file_size(path), static_cast<std::uintmax_t>(net.parameters().size() * 8));
  std::string hash;
  const auto back = load_checkpoint(path, &hash);
  EXPECT_EQ(hash, "abc123");
  EXPECT_EQ(back.shape(), net.shape());
  EXPECT_EQ(back.parameters(), net.parameters());

  std::filesystem::resize_file(path, 16);
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
  std::filesystem::remove(path);
  std::filesystem::remove(path.string() + ".json");
  EXPECT_THROW(load_checkpoint(path), std::runtime_error);
}
