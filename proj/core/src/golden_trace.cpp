#include "kscore/golden_trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace kscore {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

bool parse_flag(const std::string& s) {
  if (s == "1" || s == "true" || s == "True") return true;
  if (s == "0" || s == "false" || s == "False") return false;
  throw std::runtime_error("bad boolean '" + s + "' in golden trace");
}

}  // namespace

GoldenTrace read_golden_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open golden trace " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("step,action,x,x_dot,theta,theta_dot,reward,terminated,truncated", 0) != 0) {
    throw std::runtime_error("unexpected golden trace header in " + path.string());
  }
  GoldenTrace trace;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 9) {
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected 9 columns");
    }
    GoldenRow row;
    row.step = std::stoi(cells[0]);
    row.action = std::stoi(cells[1]);
    row.x = std::stod(cells[2]);
    row.x_dot = std::stod(cells[3]);
    row.theta = std::stod(cells[4]);
    row.theta_dot = std::stod(cells[5]);
    row.reward = std::stod(cells[6]);
    row.terminated = parse_flag(cells[7]);
    row.truncated = parse_flag(cells[8]);
    trace.push_back(row);
  }
  return trace;
}

void write_golden_trace(const std::filesystem::path& path, const GoldenTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write golden trace " + path.string());
  out << "step,action,x,x_dot,theta,theta_dot,reward,terminated,truncated\n";
  out << std::setprecision(17);
  for (const auto& r : trace) {
    out << r.step << ',' << r.action << ',' << r.x << ',' << r.x_dot << ',' << r.theta << ',' << r.theta_dot << ','
        << r.reward << ',' << (r.terminated ? 1 : 0) << ',' << (r.truncated ? 1 : 0) << '\n';
  }
}

GoldenComparison replay_golden_trace(const GoldenTrace& trace, CartPoleIntegrator integrator) {
  GoldenComparison cmp;
  if (trace.empty()) {
    cmp.flags_match = false;
    cmp.first_mismatch = "empty trace";
    return cmp;
  }
  const GoldenRow& init = trace.front();
  CartPoleState state{init.x, init.x_dot, init.theta, init.theta_dot, 0, false};

  for (std::size_t i = 1; i < trace.size(); ++i) {
    const GoldenRow& row = trace[i];
    const CartPoleTransition tr = cartpole_step(state, row.action, integrator);
    state = tr.state;
    const double err = std::max({std::abs(state.x - row.x), std::abs(state.x_dot - row.x_dot),
                                 std::abs(state.theta - row.theta), std::abs(state.theta_dot - row.theta_dot),
                                 std::abs(tr.reward - row.reward)});
    cmp.max_abs_error = std::max(cmp.max_abs_error, err);
    ++cmp.rows_compared;
    if (tr.terminated != row.terminated || tr.truncated != row.truncated) {
      if (cmp.flags_match) cmp.first_mismatch = "flag mismatch at step " + std::to_string(row.step);
      cmp.flags_match = false;
    }
    if (state.done && i + 1 < trace.size()) {
      cmp.flags_match = false;
      if (cmp.first_mismatch.empty()) cmp.first_mismatch = "episode ended early at step " + std::to_string(row.step);
      break;
    }
  }
  return cmp;
}

std::vector<std::filesystem::path> list_golden_traces(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace kscore
