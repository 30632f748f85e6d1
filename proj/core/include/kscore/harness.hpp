#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kscore/algos.hpp"
#include "kscore/config.hpp"
#include "kscore/normalizers.hpp"
#include "kscore/policy_net.hpp"

namespace kscore {

/// One training episode as seen by the run log.
struct EpisodeLog {
  int episode = 0;  // 1-based
  double train_return = 0.0;
  std::optional<double> eval_mean;
  NormalizerSnapshot normalizer;
  std::optional<UpdateLog> update;
};

struct RunRecord {
  std::string config_hash;
  std::string normalizer;
  std::string algorithm;
  std::uint64_t train_seed = 0;
  std::uint64_t eval_seed = 0;
  int max_episodes = 0;
  std::vector<EpisodeLog> episodes;
  std::optional<int> episodes_to_threshold;
  double wall_time_s = 0.0;
  bool diverged = false;
  std::string divergence_message;

  bool reached() const { return episodes_to_threshold.has_value(); }
  /// episodes_to_threshold, or max_episodes for a censored run.
  double censored_episodes() const;
  std::vector<double> train_returns() const;
};

/// Knobs of the train/evaluate loop, independent of what is being trained.
struct LoopConfig {
  int max_episodes = 2000;
  int eval_every = 5;
  double reward_threshold = 475.0;
};

/// Trains one episode (1-based index) and returns its log entry.
using TrainEpisodeFn = std::function<EpisodeLog(int episode)>;
/// Mean return of evaluation round `eval_index` (0-based).
using EvaluateFn = std::function<double(int eval_index)>;

/// Runs train episodes, evaluating after every `eval_every`-th one, and stops at
/// the first evaluation whose mean reaches the threshold or at max_episodes.
/// DivergenceError / FilterError from training end the run with `diverged` set.
RunRecord run_loop(const LoopConfig& loop, const TrainEpisodeFn& train, const EvaluateFn& evaluate);

/// Hooks for tests; the default builds the normalizer from the config.
struct RunHooks {
  std::function<std::unique_ptr<Normalizer>(const NormalizerSpec&)> make_normalizer;
  std::function<void(const PolicyValueNet&)> on_finish;  // final parameters
};

/// Full training run on separate train/eval environments.
RunRecord run_single(const RunConfig& cfg, const RunHooks& hooks = {});

/// Per-episode CSV: episode,train_return,eval_mean_return,kalman_x,kalman_P,kalman_R,
/// normalizer,seed,mean_signal,policy_objective,value_loss,entropy
std::string run_csv(const RunRecord& record);
void write_run_csv(const std::filesystem::path& path, const RunRecord& record);

/// version, platform, seeds, timestamps, effective config and outcome.
nlohmann::json run_manifest(const RunConfig& cfg, const RunRecord& record);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Train/eval seeds of the i-th replicate of a base config.
RunConfig with_seed_index(const RunConfig& base, int index);

enum class Aggregation { Median, Mean };

struct SweepAxis {
  std::string key;                   // run-config key
  std::vector<nlohmann::json> values;
};

struct SweepSpec {
  RunConfig base;
  std::vector<SweepAxis> axes;
  int seeds = 10;
  Aggregation aggregation = Aggregation::Median;
  int jobs = 1;
};

struct CellResult {
  std::vector<std::pair<std::string, nlohmann::json>> params;
  std::vector<RunRecord> runs;
  std::vector<std::string> errors;  // runs that could not start (bad config, IO)
  double aggregate = 0.0;           // per SweepSpec::aggregation, censored at max_episodes
  double median = 0.0;
  double iqr = 0.0;
  int censored = 0;
};

struct SweepResult {
  std::vector<std::string> axis_keys;
  std::vector<CellResult> cells;
};

/// Runs every cell x seed (in parallel up to `jobs`) and aggregates
/// episodes_to_threshold per cell. A failing cell is recorded and the sweep continues.
SweepResult run_sweep(const SweepSpec& spec);

/// Columns: one per axis key, then aggregate,median_episodes,iqr,censored,seeds,failed.
std::string sweep_summary_csv(const SweepResult& result);

struct ComparisonRow {
  std::string normalizer;
  double median = 0.0;
  double iqr = 0.0;
  int censored = 0;
  int runs = 0;
  double speedup = 1.0;  // baseline median / this median
  bool speedup_censored = false;
  std::vector<RunRecord> records;
};

/// Runs each normalizer over `seeds` replicates of `base` and reports median,
/// IQR and speedup relative to the first entry. Requires at least two normalizers.
std::vector<ComparisonRow> compare_normalizers(const RunConfig& base, const std::vector<NormalizerSpec>& normalizers,
                                               int seeds, int jobs = 1);

/// Speedup of a treatment over a baseline from their (censored) episode counts.
double speedup_ratio(double baseline_episodes, double treatment_episodes);

std::string comparison_csv(const std::vector<ComparisonRow>& rows);

/// Runs fn(0..count-1) on up to `jobs` worker threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace kscore
