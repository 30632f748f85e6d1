#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "kscore/harness.hpp"

using namespace kscore;

namespace {

std::vector<std::vector<std::string>> split_csv(std::istream& in) {
  std::vector<std::vector<std::string>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(cells);
  }
  return rows;
}

void expect_same_cell(const std::string& want, const std::string& got, const std::string& where) {
  char* end = nullptr;
  const double w = std::strtod(want.c_str(), &end);
  const bool numeric = !want.empty() && end && *end == '\0';
  if (!numeric) {
    EXPECT_EQ(got, want) << where;
    return;
  }
  EXPECT_NEAR(std::stod(got), w, 1e-9 * (1.0 + std::abs(w))) << where;
}

class IdentityRegression : public ::testing::TestWithParam<std::string> {};

}  // namespace

// Each algorithm with the identity normalizer reproduces its recorded training trace.
TEST_P(IdentityRegression, MatchesRecordedTrace) {
  const std::string algo = GetParam();
  RunConfig cfg;
  cfg.normalizer.kind = NormalizerKind::Identity;
  cfg.algorithm = parse_algorithm_kind(algo);
  cfg.max_episodes = 12;
  cfg.eval_every = 4;
  cfg.eval_window = 2;
  cfg.hidden = 16;
  cfg.train_seed = 3;
  cfg.eval_seed = 1000003;

  std::ifstream fixture(std::filesystem::path(KSCORE_FIXTURE_DIR) / "identity_regression" / (algo + ".csv"));
  ASSERT_TRUE(fixture) << algo;
  std::istringstream produced(run_csv(run_single(cfg)));
  const auto want = split_csv(fixture);
  const auto got = split_csv(produced);
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t r = 0; r < want.size(); ++r) {
    ASSERT_EQ(got[r].size(), want[r].size()) << "row " << r;
    for (std::size_t c = 0; c < want[r].size(); ++c) {
      expect_same_cell(want[r][c], got[r][c], algo + " row " + std::to_string(r) + " col " + want[0][c]);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Algorithms, IdentityRegression,
                         ::testing::Values("reinforce", "actor-critic", "gae", "ppo"),
                         [](const auto& info) {
                           std::string name = info.param;
                           std::erase(name, '-');
                           return name;
                         });
