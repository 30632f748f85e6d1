#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "kscore/checkpoint.hpp"

using namespace kscore;
using namespace kscore::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("kscore_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

nlohmann::json read_json(const fs::path& path) { return nlohmann::json::parse(std::ifstream(path)); }

CliInvocation quick(Subcommand sub, const fs::path& out) {
  CliInvocation inv;
  inv.subcommand = sub;
  inv.out = out;
  inv.overrides = {"max_episodes=6", "eval_every=3", "eval_window=2", "hidden=16"};
  return inv;
}

}  // namespace

TEST(CliTrain, WritesArtifactsAndReportsNotReached) {
  const auto dir = scratch("train");
  auto inv = quick(Subcommand::Train, dir);
  inv.overrides.push_back("normalizer=zscore");
  std::ostringstream log;
  EXPECT_EQ(cmd_train(inv, log), exit_code::kNotReached);
  EXPECT_TRUE(fs::exists(dir / "run.csv"));
  const auto manifest = read_json(dir / "manifest.json");
  EXPECT_EQ(manifest.at("config").at("normalizer"), "zscore");
  EXPECT_EQ(read_csv(dir / "run.csv").size(), 7u);
  const auto net = load_checkpoint(dir / "policy.bin");
  EXPECT_EQ(net.shape().hidden, 16);
}

TEST(CliTrain, ReachedThresholdExitsZero) {
  const auto dir = scratch("train_reached");
  auto inv = quick(Subcommand::Train, dir);
  inv.overrides.push_back("reward_threshold=1");
  std::ostringstream log;
  EXPECT_EQ(cmd_train(inv, log), exit_code::kOk);
}

TEST(CliTrain, ConfigFileAndOverridePrecedence) {
  const auto dir = scratch("train_cfg");
  std::ofstream(dir / "cfg.json") << R"({"normalizer": "kalman", "q": 0.05, "max_episodes": 3, "eval_every": 3,
    "eval_window": 1, "hidden": 8})";
  CliInvocation inv;
  inv.config = dir / "cfg.json";
  inv.out = dir / "out";
  inv.overrides = {"q=0.2"};
  std::ostringstream log;
  cmd_train(inv, log);
  const auto cfg = read_json(dir / "out" / "manifest.json").at("config");
  EXPECT_EQ(cfg.at("normalizer"), "kalman");
  EXPECT_EQ(cfg.at("q"), 0.2);
  EXPECT_EQ(cfg.at("max_episodes"), 3);
}

TEST(CliTrain, MalformedConfigNamesFileAndPosition) {
  const auto dir = scratch("train_bad");
  std::ofstream(dir / "bad.json") << "{\n  \"q\": 0.1,,\n}\n";
  CliInvocation inv;
  inv.config = dir / "bad.json";
  inv.out = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_train(inv, log), exit_code::kError);
  EXPECT_NE(log.str().find("bad.json:2:"), std::string::npos) << log.str();
}

TEST(CliTrain, UnknownKeyIsNamed) {
  auto inv = quick(Subcommand::Train, scratch("train_key"));
  inv.overrides.push_back("normaliser=zscore");
  std::ostringstream log;
  EXPECT_EQ(cmd_train(inv, log), exit_code::kError);
  EXPECT_NE(log.str().find("normaliser"), std::string::npos);
}

TEST(CliTrain, SeedFromEnvironment) {
  const auto dir = scratch("train_env_seed");
  ::setenv("KSCORE_SEED", "77", 1);
  std::ostringstream log;
  cmd_train(quick(Subcommand::Train, dir), log);
  ::unsetenv("KSCORE_SEED");
  const auto cfg = read_json(dir / "manifest.json").at("config");
  EXPECT_EQ(cfg.at("train_seed"), 77);
  EXPECT_EQ(cfg.at("eval_seed"), 1000077);
}

TEST(CliTrain, IdempotentRunCsv) {
  const auto a = scratch("idem_a"), b = scratch("idem_b");
  std::ostringstream log;
  cmd_train(quick(Subcommand::Train, a), log);
  cmd_train(quick(Subcommand::Train, b), log);
  std::ifstream fa(a / "run.csv"), fb(b / "run.csv");
  EXPECT_EQ(std::string(std::istreambuf_iterator<char>(fa), {}), std::string(std::istreambuf_iterator<char>(fb), {}));
}

TEST(CliAblateQ, CustomValuesAndSingleSeed) {
  const auto dir = scratch("ablate");
  auto inv = quick(Subcommand::AblateQ, dir);
  inv.q_values = {0.5, 0.7};
  inv.seeds = 1;
  std::ostringstream log;
  EXPECT_EQ(cmd_ablate_q(inv, log), exit_code::kOk);
  const auto rows = read_csv(dir / "ablate_q.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0][0], "Q");
  EXPECT_EQ(rows[0][1], "R");
  EXPECT_EQ(rows[0][2], "median_episodes");
  EXPECT_EQ(rows[1][0], "0.5");
  EXPECT_EQ(rows[2][0], "0.7");
  EXPECT_EQ(rows[1][1], "1");
  // One seed: the summary is the run itself (censored at max_episodes here).
  EXPECT_EQ(rows[1][2], "6");
  EXPECT_EQ(rows[1][4], "1");
  EXPECT_TRUE(fs::exists(dir / "runs"));
}

TEST(CliCompare, WritesTable) {
  const auto dir = scratch("compare");
  auto inv = quick(Subcommand::Compare, dir);
  inv.seeds = 2;
  std::ostringstream log;
  EXPECT_EQ(cmd_compare(inv, log), exit_code::kOk);
  const auto rows = read_csv(dir / "compare.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][0], "zscore");
  EXPECT_EQ(rows[2][0], "kalman-adaptive");
}

TEST(CliSweep, RunsGridFromConfig) {
  const auto dir = scratch("sweep");
  std::ofstream(dir / "sweep.json") << R"({"base": {"max_episodes": 3, "eval_every": 3, "eval_window": 1, "hidden": 8},
    "axes": {"q": [0.01, 0.1], "r": [1, 2]}, "seeds": 1})";
  CliInvocation inv;
  inv.subcommand = Subcommand::Sweep;
  inv.config = dir / "sweep.json";
  inv.out = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_sweep(inv, log), exit_code::kOk) << log.str();
  EXPECT_EQ(read_csv(dir / "out" / "sweep_summary.csv").size(), 5u);
}

TEST(CliFilterSim, ConvergesToSteadyState) {
  const auto dir = scratch("filter_sim");
  CliInvocation inv;
  inv.subcommand = Subcommand::FilterSim;
  inv.out = dir;
  inv.overrides = {"trials=0", "q=0.02", "r=1.5"};
  std::ostringstream log;
  ASSERT_EQ(cmd_filter_sim(inv, log), exit_code::kOk);
  const auto rows = read_csv(dir / "filter_sim.csv");
  ASSERT_EQ(rows.size(), 10001u);
  const auto& header = rows[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  const double p_last = std::stod(rows.back()[col("kalman_P")]);
  EXPECT_NEAR(p_last, std::stod(rows.back()[col("p_inf")]), 1e-6);
  EXPECT_FALSE(fs::exists(dir / "mse_curve.csv"));
}

TEST(CliFilterSim, RecursiveMeanReduction) {
  const auto dir = scratch("filter_sim_mean");
  CliInvocation inv;
  inv.subcommand = Subcommand::FilterSim;
  inv.out = dir;
  inv.overrides = {"trials=100", "mse_horizon=50", "q_true=0", "q=0", "p0=1e12", "horizon=2000"};
  std::ostringstream log;
  ASSERT_EQ(cmd_filter_sim(inv, log), exit_code::kOk);
  const auto rows = read_csv(dir / "filter_sim.csv");
  const auto& header = rows[0];
  const auto col = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(header.begin(), header.end(), name) - header.begin());
  };
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double mean = std::stod(rows[i][col("sample_mean")]);
    EXPECT_NEAR(std::stod(rows[i][col("kalman_x")]), mean, 1e-6 * (1.0 + std::abs(mean)));
  }
  EXPECT_EQ(read_csv(dir / "mse_curve.csv").size(), 51u);
}

TEST(CliGoldenCheck, Passes) {
  CliInvocation inv;
  inv.subcommand = Subcommand::GoldenCheck;
  inv.fixtures = KSCORE_GOLDEN_DIR;
  std::ostringstream log;
  EXPECT_EQ(cmd_golden_check(inv, log), exit_code::kOk) << log.str();
  EXPECT_EQ(log.str().find("FAIL"), std::string::npos);
}

TEST(CliRun, ParsesArguments) {
  const auto dir = scratch("run_argv");
  const std::string out = dir.string();
  const char* argv[] = {"kscore", "ablate-q", "--q-values", "0.5,0.7", "--seeds", "1", "--out", out.c_str(),
                        "--set",  "max_episodes=2", "--set", "eval_every=2", "--set", "eval_window=1", "-q"};
  EXPECT_EQ(run(static_cast<int>(std::size(argv)), const_cast<char**>(argv)), exit_code::kOk);
  EXPECT_EQ(read_csv(dir / "ablate_q.csv").size(), 3u);

  const char* bad[] = {"kscore", "frobnicate"};
  EXPECT_NE(run(2, const_cast<char**>(bad)), exit_code::kOk);
}
