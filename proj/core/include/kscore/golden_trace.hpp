#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kscore/cartpole.hpp"

namespace kscore {

/// One row of a cart-pole golden trace. Row 0 holds the reset state (action -1).
struct GoldenRow {
  int step = 0;
  int action = -1;
  double x = 0.0;
  double x_dot = 0.0;
  double theta = 0.0;
  double theta_dot = 0.0;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

using GoldenTrace = std::vector<GoldenRow>;

/// CSV columns: step,action,x,x_dot,theta,theta_dot,reward,terminated,truncated
GoldenTrace read_golden_trace(const std::filesystem::path& path);
void write_golden_trace(const std::filesystem::path& path, const GoldenTrace& trace);

struct GoldenComparison {
  double max_abs_error = 0.0;
  int rows_compared = 0;
  bool flags_match = true;
  std::string first_mismatch;

  bool ok(double tolerance) const { return flags_match && max_abs_error <= tolerance; }
};

/// Replays the recorded actions from the recorded initial state and compares
/// every state component, reward and flag.
GoldenComparison replay_golden_trace(const GoldenTrace& trace,
                                     CartPoleIntegrator integrator = CartPoleIntegrator::Euler);

/// All *.csv traces in a directory, sorted by filename.
std::vector<std::filesystem::path> list_golden_traces(const std::filesystem::path& dir);

}  // namespace kscore
