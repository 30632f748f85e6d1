#include "kscore/harness.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "kscore/environment.hpp"
#include "kscore/filter.hpp"
#include "kscore/policy_net.hpp"
#include "kscore/rng.hpp"
#include "kscore/stats.hpp"
#include "kscore/trajectory.hpp"
#include "kscore/version.hpp"

namespace kscore {

double RunRecord::censored_episodes() const {
  return episodes_to_threshold ? static_cast<double>(*episodes_to_threshold) : static_cast<double>(max_episodes);
}

std::vector<double> RunRecord::train_returns() const {
  std::vector<double> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(e.train_return);
  return out;
}

RunRecord run_loop(const LoopConfig& loop, const TrainEpisodeFn& train, const EvaluateFn& evaluate) {
  RunRecord rec;
  rec.max_episodes = loop.max_episodes;
  int eval_index = 0;
  for (int episode = 1; episode <= loop.max_episodes; ++episode) {
    EpisodeLog log;
    try {
      log = train(episode);
    } catch (const DivergenceError& e) {
      rec.diverged = true;
      rec.divergence_message = e.what();
      break;
    } catch (const FilterError& e) {
      rec.diverged = true;
      rec.divergence_message = e.what();
      break;
    }
    log.episode = episode;
    if (episode % loop.eval_every == 0) {
      log.eval_mean = evaluate(eval_index++);
    }
    const bool solved = log.eval_mean && *log.eval_mean >= loop.reward_threshold;
    rec.episodes.push_back(std::move(log));
    if (solved) {
      rec.episodes_to_threshold = episode;
      break;
    }
  }
  return rec;
}

RunRecord run_single(const RunConfig& cfg, const RunHooks& hooks) {
  cfg.validate();
  const auto started = std::chrono::steady_clock::now();

  auto train_env = make_environment(cfg.env);
  auto eval_env = make_environment(cfg.env);
  const NetShape shape{train_env->observation_dim(), cfg.hidden, train_env->action_count()};
  PolicyValueNet net = PolicyValueNet::initialized(shape, cfg.train_seed);
  Optimizer opt(cfg.effective_optimizer());
  std::unique_ptr<Normalizer> normalizer =
      hooks.make_normalizer ? hooks.make_normalizer(cfg.normalizer) : make_normalizer(cfg.normalizer);
  Agent agent(cfg.algorithm, cfg.algo, net, opt, *normalizer, Rng(cfg.train_seed, streams::kMinibatch));

  Rng action_rng(cfg.train_seed, streams::kActionSampling);
  Rng eval_rng(cfg.eval_seed, streams::kActionSampling);

  LoopConfig loop;
  loop.max_episodes = cfg.max_episodes;
  loop.eval_every = cfg.eval_every;
  loop.reward_threshold = cfg.reward_threshold.value_or(train_env->reward_threshold());

  auto train = [&](int episode) {
    Trajectory traj = collect_episode(*train_env, net, action_rng,
                                      stream_seed(cfg.train_seed, "train-episode", static_cast<std::uint64_t>(episode)));
    EpisodeLog log;
    log.train_return = traj.total_reward();
    log.update = agent.observe_episode(std::move(traj));
    log.normalizer = normalizer->snapshot();
    return log;
  };
  auto evaluate = [&](int eval_index) {
    double total = 0.0;
    for (int j = 0; j < cfg.eval_window; ++j) {
      const auto idx = static_cast<std::uint64_t>(eval_index) * static_cast<std::uint64_t>(cfg.eval_window) + j;
      total += evaluate_episode(*eval_env, net, eval_rng, stream_seed(cfg.eval_seed, "eval-episode", idx),
                                cfg.eval_policy);
    }
    return total / cfg.eval_window;
  };

  RunRecord rec = run_loop(loop, train, evaluate);
  if (hooks.on_finish) hooks.on_finish(net);
  rec.config_hash = config_hash(cfg);
  rec.normalizer = std::string(to_string(cfg.normalizer.kind));
  rec.algorithm = std::string(to_string(cfg.algorithm));
  rec.train_seed = cfg.train_seed;
  rec.eval_seed = cfg.eval_seed;
  rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return rec;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string platform_string() {
  std::string s;
#if defined(__linux__)
  s = "linux";
#elif defined(__APPLE__)
  s = "darwin";
#elif defined(_WIN32)
  s = "windows";
#else
  s = "unknown";
#endif
#if defined(__clang__)
  s += " clang " __clang_version__;
#elif defined(__GNUC__)
  s += " gcc " __VERSION__;
#endif
  return s;
}

}  // namespace

std::string run_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "episode,train_return,eval_mean_return,kalman_x,kalman_P,kalman_R,normalizer,seed,"
         "mean_signal,policy_objective,value_loss,entropy\n";
  for (const EpisodeLog& e : record.episodes) {
    out << e.episode << ',' << fmt(e.train_return) << ',' << (e.eval_mean ? fmt(*e.eval_mean) : "") << ','
        << fmt(e.normalizer.mean) << ',' << fmt(e.normalizer.variance) << ','
        << (e.normalizer.r ? fmt(*e.normalizer.r) : "") << ',' << record.normalizer << ',' << record.train_seed;
    if (e.update) {
      out << ',' << fmt(e.update->mean_signal) << ',' << fmt(e.update->policy_objective) << ','
          << fmt(e.update->value_loss) << ',' << fmt(e.update->mean_entropy);
    } else {
      out << ",,,,";
    }
    out << '\n';
  }
  return out.str();
}

void write_run_csv(const std::filesystem::path& path, const RunRecord& record) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << run_csv(record);
}

nlohmann::json run_manifest(const RunConfig& cfg, const RunRecord& record) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["platform"] = platform_string();
  j["written_at"] = utc_timestamp();
  j["wall_time_s"] = record.wall_time_s;
  j["config_hash"] = record.config_hash;
  j["config"] = to_json(cfg);
  j["seeds"] = {{"train", cfg.train_seed}, {"eval", cfg.eval_seed}};
  j["normalizer"] = record.normalizer;
  j["zscore_mode"] = std::string(to_string(cfg.normalizer.zscore_mode));
  j["episodes_run"] = record.episodes.size();
  j["episodes_to_threshold"] =
      record.episodes_to_threshold ? nlohmann::json(*record.episodes_to_threshold) : nlohmann::json("not reached");
  j["diverged"] = record.diverged;
  if (record.diverged) j["divergence_message"] = record.divergence_message;
  return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

RunConfig with_seed_index(const RunConfig& base, int index) {
  RunConfig c = base;
  c.train_seed = base.train_seed + static_cast<std::uint64_t>(index);
  c.eval_seed = base.eval_seed + static_cast<std::uint64_t>(index);
  return c;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::max(1, std::min(jobs, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

namespace {

void summarize(CellResult& cell, Aggregation aggregation) {
  std::vector<double> episodes;
  cell.censored = 0;
  for (const RunRecord& r : cell.runs) {
    episodes.push_back(r.censored_episodes());
    if (!r.reached()) ++cell.censored;
  }
  if (episodes.empty()) return;
  cell.median = median(episodes);
  cell.iqr = interquartile_range(episodes);
  cell.aggregate = aggregation == Aggregation::Median ? cell.median : mean(episodes);
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec) {
  if (spec.seeds <= 0) throw std::invalid_argument("sweep needs at least one seed");
  SweepResult result;
  for (const auto& axis : spec.axes) {
    if (axis.values.empty()) throw std::invalid_argument("sweep axis '" + axis.key + "' has no values");
    result.axis_keys.push_back(axis.key);
  }

  // cartesian product, last axis fastest
  std::size_t cell_count = 1;
  for (const auto& axis : spec.axes) cell_count *= axis.values.size();
  std::vector<std::optional<RunConfig>> cell_configs(cell_count);
  result.cells.resize(cell_count);
  for (std::size_t c = 0; c < cell_count; ++c) {
    nlohmann::json j = to_json(spec.base);
    // an unset learning rate follows whatever algorithm the cell ends up with
    if (!spec.base.learning_rate) j.erase("lr");
    std::size_t rem = c;
    std::vector<std::pair<std::string, nlohmann::json>> params(spec.axes.size());
    for (std::size_t a = spec.axes.size(); a-- > 0;) {
      const auto& axis = spec.axes[a];
      const auto& value = axis.values[rem % axis.values.size()];
      rem /= axis.values.size();
      j[axis.key] = value;
      params[a] = {axis.key, value};
    }
    result.cells[c].params = std::move(params);
    try {
      cell_configs[c] = run_config_from_json(j);
    } catch (const std::exception& e) {
      result.cells[c].errors.push_back(e.what());
    }
  }

  const int tasks = static_cast<int>(cell_count) * spec.seeds;
  std::vector<std::optional<RunRecord>> records(static_cast<std::size_t>(tasks));
  std::vector<std::string> task_errors(static_cast<std::size_t>(tasks));
  parallel_for(tasks, spec.jobs, [&](int task) {
    const auto cell = static_cast<std::size_t>(task / spec.seeds);
    const int seed = task % spec.seeds;
    if (!cell_configs[cell]) return;
    try {
      records[static_cast<std::size_t>(task)] = run_single(with_seed_index(*cell_configs[cell], seed));
    } catch (const std::exception& e) {
      task_errors[static_cast<std::size_t>(task)] = e.what();
    }
  });

  for (int task = 0; task < tasks; ++task) {
    CellResult& cell = result.cells[static_cast<std::size_t>(task / spec.seeds)];
    if (records[static_cast<std::size_t>(task)]) {
      cell.runs.push_back(std::move(*records[static_cast<std::size_t>(task)]));
    } else if (!task_errors[static_cast<std::size_t>(task)].empty()) {
      cell.errors.push_back(task_errors[static_cast<std::size_t>(task)]);
    }
  }
  for (auto& cell : result.cells) summarize(cell, spec.aggregation);
  return result;
}

std::string sweep_summary_csv(const SweepResult& result) {
  std::ostringstream out;
  for (const auto& key : result.axis_keys) out << key << ',';
  out << "aggregate,median_episodes,iqr,censored,seeds,failed\n";
  for (const auto& cell : result.cells) {
    for (const auto& [key, value] : cell.params) {
      out << (value.is_number() ? fmt(value.get<double>()) : value.is_string() ? value.get<std::string>() : value.dump())
          << ',';
    }
    out << fmt(cell.aggregate) << ',' << fmt(cell.median) << ',' << fmt(cell.iqr) << ',' << cell.censored << ','
        << cell.runs.size() << ',' << cell.errors.size() << '\n';
  }
  return out.str();
}

double speedup_ratio(double baseline_episodes, double treatment_episodes) {
  if (!(treatment_episodes > 0.0)) throw std::invalid_argument("treatment episode count must be > 0");
  return baseline_episodes / treatment_episodes;
}

std::vector<ComparisonRow> compare_normalizers(const RunConfig& base, const std::vector<NormalizerSpec>& normalizers,
                                               int seeds, int jobs) {
  if (normalizers.size() < 2) throw std::invalid_argument("compare_normalizers needs at least two normalizers");
  if (seeds <= 0) throw std::invalid_argument("compare_normalizers needs at least one seed");
  const int arms = static_cast<int>(normalizers.size());
  std::vector<RunRecord> records(static_cast<std::size_t>(arms * seeds));
  parallel_for(arms * seeds, jobs, [&](int task) {
    RunConfig cfg = with_seed_index(base, task % seeds);
    cfg.normalizer = normalizers[static_cast<std::size_t>(task / seeds)];
    records[static_cast<std::size_t>(task)] = run_single(cfg);
  });

  std::vector<ComparisonRow> rows;
  for (int a = 0; a < arms; ++a) {
    ComparisonRow row;
    row.normalizer = std::string(to_string(normalizers[static_cast<std::size_t>(a)].kind));
    std::vector<double> eps;
    for (int s = 0; s < seeds; ++s) {
      RunRecord& r = records[static_cast<std::size_t>(a * seeds + s)];
      eps.push_back(r.censored_episodes());
      if (!r.reached()) ++row.censored;
      row.records.push_back(std::move(r));
    }
    row.runs = seeds;
    row.median = median(eps);
    row.iqr = interquartile_range(eps);
    rows.push_back(std::move(row));
  }
  for (auto& row : rows) {
    row.speedup = speedup_ratio(rows.front().median, row.median);
    row.speedup_censored = row.censored > 0 || rows.front().censored > 0;
  }
  return rows;
}

std::string comparison_csv(const std::vector<ComparisonRow>& rows) {
  std::ostringstream out;
  out << "normalizer,median_episodes,iqr,censored,runs,speedup,speedup_censored\n";
  for (const auto& r : rows) {
    out << r.normalizer << ',' << fmt(r.median) << ',' << fmt(r.iqr) << ',' << r.censored << ',' << r.runs << ','
        << fmt(r.speedup) << ',' << (r.speedup_censored ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace kscore
