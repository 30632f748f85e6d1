#include <vector>

#include <benchmark/benchmark.h>

#include "kscore/cartpole.hpp"
#include "kscore/filter.hpp"
#include "kscore/normalizers.hpp"
#include "kscore/policy_net.hpp"
#include "kscore/rng.hpp"

using namespace kscore;

static void BM_KalmanStep(benchmark::State& state) {
  Rng rng(1);
  std::vector<double> obs(4096);
  for (auto& v : obs) v = rng.normal(100.0, 20.0);
  KalmanState s;
  std::size_t i = 0;
  for (auto _ : state) {
    s = step(s, obs[i++ & 4095], {1e-2, 1.0}).state;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_KalmanStep);

static void BM_NormalizerObserve(benchmark::State& state) {
  NormalizerSpec spec;
  spec.kind = static_cast<NormalizerKind>(state.range(0));
  auto n = make_normalizer(spec);
  std::vector<double> returns(4096);
  Rng rng(7);
  for (auto& g : returns) g = rng.normal(100.0, 20.0);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(n->observe(returns[i]));
    i = (i + 1) & (returns.size() - 1);
  }
  state.SetLabel(n->name());
}
BENCHMARK(BM_NormalizerObserve)->DenseRange(0, 3);

static void BM_NetForward(benchmark::State& state) {
  const auto net = PolicyValueNet::initialized({4, static_cast<int>(state.range(0)), 2}, 1);
  Eigen::VectorXd o(4);
  o << 0.01, -0.02, 0.03, 0.04;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(o));
}
BENCHMARK(BM_NetForward)->Arg(64)->Arg(256);

static void BM_NetBackward(benchmark::State& state) {
  const auto net = PolicyValueNet::initialized({4, static_cast<int>(state.range(0)), 2}, 1);
  auto grad = net.make_gradient_buffer();
  Eigen::VectorXd o(4);
  o << 0.01, -0.02, 0.03, 0.04;
  for (auto _ : state) {
    net.accumulate(o, 1, {1.0, 0.5, 0.01, 2.0}, grad);
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_NetBackward)->Arg(64)->Arg(256);

static void BM_CartPoleStep(benchmark::State& state) {
  CartPole env;
  env.reset(0);
  int a = 0;
  for (auto _ : state) {
    auto st = env.step(a ^= 1);
    if (st.done()) env.reset(a);
    benchmark::DoNotOptimize(st);
  }
}
BENCHMARK(BM_CartPoleStep);
BENCHMARK_MAIN();
