#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace kscore::cli {

enum class Subcommand { Train, Compare, AblateQ, Sweep, FilterSim, GoldenCheck };

struct CliInvocation {
  Subcommand subcommand = Subcommand::Train;
  std::optional<std::filesystem::path> config;
  std::vector<std::string> overrides;  // KEY=VALUE, applied after the file
  std::filesystem::path out = "kscore_out";
  std::optional<int> seeds;
  int jobs = 1;
  std::vector<double> q_values;
  std::vector<std::string> normalizers;
  std::optional<std::filesystem::path> fixtures;
  int verbosity = 1;
};

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kError = 1;
inline constexpr int kNotReached = 2;
}  // namespace exit_code

int cmd_train(const CliInvocation& inv, std::ostream& log);
int cmd_compare(const CliInvocation& inv, std::ostream& log);
int cmd_ablate_q(const CliInvocation& inv, std::ostream& log);
int cmd_sweep(const CliInvocation& inv, std::ostream& log);
int cmd_filter_sim(const CliInvocation& inv, std::ostream& log);
int cmd_golden_check(const CliInvocation& inv, std::ostream& log);

int dispatch(const CliInvocation& inv, std::ostream& log);

/// Parses argv and runs the subcommand; returns the process exit code.
int run(int argc, char** argv);

}  // namespace kscore::cli
