#include <cmath>
#include <filesystem>

#include <gtest/gtest.h>

#include "kscore/cartpole.hpp"
#include "kscore/golden_trace.hpp"

using namespace kscore;

namespace {

const std::filesystem::path kGoldenDir = KSCORE_GOLDEN_DIR;

}  // namespace

TEST(CartPole, GoldenTracesReplayExactly) {
  const auto traces = list_golden_traces(kGoldenDir);
  ASSERT_EQ(traces.size(), 20u);
  int truncated = 0;
  for (const auto& path : traces) {
    const auto trace = read_golden_trace(path);
    const auto cmp = replay_golden_trace(trace);
    EXPECT_TRUE(cmp.ok(1e-6)) << path.filename() << ": " << cmp.max_abs_error << " " << cmp.first_mismatch;
    EXPECT_EQ(cmp.rows_compared + 1, static_cast<int>(trace.size()));
    truncated += trace.back().truncated;
  }
  EXPECT_GT(truncated, 0);
}

TEST(CartPole, SemiImplicitIntegratorDiffers) {
  const auto trace = read_golden_trace(kGoldenDir / "seed_17.csv");
  EXPECT_FALSE(replay_golden_trace(trace, CartPoleIntegrator::SemiImplicitEuler).ok(1e-6));
}

TEST(CartPole, GoldenTraceRoundTrip) {
  const auto trace = read_golden_trace(kGoldenDir / "seed_00.csv");
  const auto tmp = std::filesystem::temp_directory_path() / "kscore_golden_roundtrip.csv";
  write_golden_trace(tmp, trace);
  const auto back = read_golden_trace(tmp);
  ASSERT_EQ(back.size(), trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    EXPECT_EQ(back[i].x, trace[i].x);
    EXPECT_EQ(back[i].theta_dot, trace[i].theta_dot);
    EXPECT_EQ(back[i].action, trace[i].action);
  }
  std::filesystem::remove(tmp);
}

TEST(CartPole, ResetIsSeededAndBounded) {
  CartPole a, b;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto oa = a.reset(seed);
    const auto ob = b.reset(seed);
    EXPECT_EQ(oa, ob);
    EXPECT_LE(oa.cwiseAbs().maxCoeff(), 0.05);
  }
  EXPECT_NE(a.reset(1), a.reset(2));
}

TEST(CartPole, KnownStepFromRest) {
  // From the upright rest state, push right: only the accelerations are nonzero.
  CartPoleState s;
  const auto tr = cartpole_step(s, 1);
  const double temp = cartpole::kForceMag / cartpole::kTotalMass;
  const double thetaacc = -temp / (cartpole::kHalfLength * (4.0 / 3.0 - cartpole::kMassPole / cartpole::kTotalMass));
  const double xacc = temp - cartpole::kPoleMassLength * thetaacc / cartpole::kTotalMass;
  EXPECT_EQ(tr.state.x, 0.0);
  EXPECT_EQ(tr.state.theta, 0.0);
  EXPECT_NEAR(tr.state.x_dot, 0.02 * xacc, 1e-15);
  EXPECT_NEAR(tr.state.theta_dot, 0.02 * thetaacc, 1e-15);
  EXPECT_EQ(tr.reward, 1.0);
  EXPECT_FALSE(tr.terminated);
}

TEST(CartPole, TerminationThresholds) {
  CartPole env;
  env.set_state(2.39, 1.0, 0.0, 0.0);
  auto st = env.step(1);
  EXPECT_TRUE(st.terminated);
  EXPECT_EQ(st.reward, 1.0);
  EXPECT_THROW(env.step(0), StepAfterDoneError);

  env.set_state(0.0, 0.0, 0.2094, 0.5);
  EXPECT_TRUE(env.step(1).terminated);

  env.set_state(0.0, 0.0, 0.1, 0.0);
  EXPECT_FALSE(env.step(1).terminated);
}

TEST(CartPole, TruncatesAt500) {
  CartPoleState s;
  CartPoleTransition tr;
  for (int i = 0; i < 500; ++i) {
    // Keep the pole near upright with a crude bang-bang law.
    const int action = s.theta + 0.5 * s.theta_dot + 0.01 * s.x + 0.1 * s.x_dot > 0.0 ? 1 : 0;
    tr = cartpole_step(s, action);
    ASSERT_FALSE(tr.terminated) << "step " << i;
    ASSERT_EQ(tr.truncated, i == 499);
    s = tr.state;
  }
  EXPECT_TRUE(s.done);
  EXPECT_THROW(cartpole_step(s, 0), StepAfterDoneError);
}

TEST(CartPole, RejectsBadInput) {
  CartPole env;
  EXPECT_THROW(env.step(0), StepAfterDoneError);
  env.reset(0);
  EXPECT_THROW(env.step(2), std::invalid_argument);
  EXPECT_THROW(env.step(-1), std::invalid_argument);
  EXPECT_THROW(make_environment("Pendulum-v1"), std::invalid_argument);
  auto e = make_environment("CartPole-v1");
  EXPECT_EQ(e->action_count(), 2);
  EXPECT_EQ(e->observation_dim(), 4);
  EXPECT_EQ(e->reward_threshold(), 475.0);
}
