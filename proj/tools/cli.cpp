#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "kscore/checkpoint.hpp"
#include "kscore/config.hpp"
#include "kscore/filter_sim.hpp"
#include "kscore/golden_trace.hpp"
#include "kscore/gradient_check.hpp"
#include "kscore/harness.hpp"
#include "kscore/version.hpp"

#ifndef KSCORE_DEFAULT_GOLDEN_DIR
#define KSCORE_DEFAULT_GOLDEN_DIR "tests/fixtures/cartpole_golden"
#endif

namespace kscore::cli {

namespace {

constexpr std::uint64_t kEvalSeedOffset = 1000000;

// Config file (or defaults), then KSCORE_SEED for unset seeds, then --set overrides.
nlohmann::json effective_json(const CliInvocation& inv, const nlohmann::json& defaults) {
  nlohmann::json j = defaults;
  if (inv.config) {
    const nlohmann::json file = read_json_file(*inv.config);
    if (!file.is_object()) throw ConfigError(inv.config->string() + ": top level must be a JSON object");
    for (const auto& [k, v] : file.items()) j[k] = v;
  }
  if (const char* env = std::getenv("KSCORE_SEED"); env && *env) {
    const auto seed = std::stoull(env);
    const bool file_sets_seed = inv.config && read_json_file(*inv.config).contains("train_seed");
    if (!file_sets_seed && defaults.contains("train_seed")) {
      j["train_seed"] = seed;
      j["eval_seed"] = seed + kEvalSeedOffset;
    }
  }
  for (const auto& o : inv.overrides) apply_override(j, o);
  return j;
}

// to_json reports the resolved learning rate; drop it so the per-algorithm default still applies
// when a config file or --set picks a different algorithm.
nlohmann::json run_defaults() {
  nlohmann::json j = to_json(RunConfig{});
  j.erase("lr");
  return j;
}

RunConfig effective_run_config(const CliInvocation& inv, nlohmann::json defaults = run_defaults()) {
  return run_config_from_json(effective_json(inv, defaults));
}

void ensure_dir(const std::filesystem::path& dir) { std::filesystem::create_directories(dir); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string run_file_name(const RunRecord& r) {
  return r.normalizer + "_seed" + std::to_string(r.train_seed) + ".csv";
}

nlohmann::json base_manifest(const std::string& subcommand) {
  nlohmann::json m;
  m["version"] = kVersion;
  m["subcommand"] = subcommand;
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  m["written_at"] = buf;
#if defined(__linux__)
  m["platform"] = "linux";
#else
  m["platform"] = "other";
#endif
  return m;
}

template <typename Fn>
int guarded(std::ostream& log, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return exit_code::kError;
  }
}

}  // namespace

int cmd_train(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig cfg = effective_run_config(inv);
    ensure_dir(inv.out);
    const auto ckpt = inv.out / "policy.bin";
    RunHooks hooks;
    hooks.on_finish = [&](const PolicyValueNet& net) { save_checkpoint(ckpt, net, config_hash(cfg)); };
    const RunRecord rec = run_single(cfg, hooks);
    write_run_csv(inv.out / "run.csv", rec);
    nlohmann::json manifest = run_manifest(cfg, rec);
    manifest["subcommand"] = "train";
    write_json(inv.out / "manifest.json", manifest);

    if (inv.verbosity > 0) {
      log << "run " << rec.config_hash << " (" << rec.algorithm << ", " << rec.normalizer << ", seed " << rec.train_seed
          << "): ";
      if (rec.diverged) {
        log << "diverged after " << rec.episodes.size() << " episodes: " << rec.divergence_message << '\n';
      } else if (rec.reached()) {
        log << "threshold reached at episode " << *rec.episodes_to_threshold << '\n';
      } else {
        log << "threshold not reached in " << cfg.max_episodes << " episodes\n";
      }
    }
    if (rec.diverged) return exit_code::kError;
    return rec.reached() ? exit_code::kOk : exit_code::kNotReached;
  });
}

int cmd_compare(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    const RunConfig base = effective_run_config(inv);
    std::vector<std::string> names = inv.normalizers;
    if (names.empty()) names = {"zscore", "kalman-adaptive"};
    std::vector<NormalizerSpec> specs;
    for (const auto& n : names) {
      NormalizerSpec s = base.normalizer;
      s.kind = parse_normalizer_kind(n);
      specs.push_back(s);
    }
    const int seeds = inv.seeds.value_or(10);
    const auto rows = compare_normalizers(base, specs, seeds, inv.jobs);

    ensure_dir(inv.out / "runs");
    write_text(inv.out / "compare.csv", comparison_csv(rows));
    nlohmann::json manifest = base_manifest("compare");
    manifest["config"] = to_json(base);
    manifest["seeds"] = seeds;
    manifest["normalizers"] = names;
    for (const auto& row : rows) {
      for (const auto& r : row.records) write_run_csv(inv.out / "runs" / run_file_name(r), r);
    }
    write_json(inv.out / "manifest.json", manifest);
    if (inv.verbosity > 0) log << comparison_csv(rows);
    return exit_code::kOk;
  });
}

namespace {

void write_sweep_outputs(const CliInvocation& inv, const SweepResult& result) {
  ensure_dir(inv.out / "runs");
  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    for (const auto& r : result.cells[c].runs) {
      write_run_csv(inv.out / "runs" / ("cell" + std::to_string(c) + "_" + run_file_name(r)), r);
    }
  }
}

}  // namespace

int cmd_ablate_q(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    nlohmann::json defaults = run_defaults();
    defaults["normalizer"] = "kalman";
    defaults["r"] = 1.0;
    SweepSpec spec;
    spec.base = effective_run_config(inv, defaults);
    std::vector<double> qs = inv.q_values;
    if (qs.empty()) qs = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    SweepAxis axis{"q", {}};
    for (double q : qs) axis.values.emplace_back(q);
    spec.axes = {axis};
    spec.seeds = inv.seeds.value_or(10);
    spec.jobs = inv.jobs;
    const SweepResult result = run_sweep(spec);

    std::ostringstream table;
    table << "Q,R,median_episodes,iqr,censored,seeds\n";
    for (const auto& cell : result.cells) {
      char line[160];
      std::snprintf(line, sizeof line, "%.10g,%.10g,%.10g,%.10g,%d,%zu\n", cell.params.front().second.get<double>(),
                    spec.base.normalizer.r, cell.median, cell.iqr, cell.censored, cell.runs.size());
      table << line;
    }
    ensure_dir(inv.out);
    write_text(inv.out / "ablate_q.csv", table.str());
    write_sweep_outputs(inv, result);
    nlohmann::json manifest = base_manifest("ablate-q");
    manifest["config"] = to_json(spec.base);
    manifest["q_values"] = qs;
    manifest["seeds"] = spec.seeds;
    write_json(inv.out / "manifest.json", manifest);
    if (inv.verbosity > 0) log << table.str();
    return exit_code::kOk;
  });
}

int cmd_sweep(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    if (!inv.config) throw ConfigError("sweep requires --config with base, axes and seeds");
    nlohmann::json file = read_json_file(*inv.config);
    for (const auto& o : inv.overrides) apply_override(file, o);
    if (!file.contains("axes") || !file.at("axes").is_object()) {
      throw ConfigError("sweep config key 'axes' must be an object of key -> value list");
    }
    SweepSpec spec;
    spec.base = run_config_from_json(file.value("base", nlohmann::json::object()));
    for (const auto& [key, values] : file.at("axes").items()) {
      if (!values.is_array()) throw ConfigError("sweep axis '" + key + "' must be a list");
      spec.axes.push_back({key, std::vector<nlohmann::json>(values.begin(), values.end())});
    }
    spec.seeds = inv.seeds.value_or(file.value("seeds", 10));
    const std::string agg = file.value("aggregation", "median");
    if (agg != "median" && agg != "mean") throw ConfigError("sweep key 'aggregation': expected median or mean");
    spec.aggregation = agg == "median" ? Aggregation::Median : Aggregation::Mean;
    spec.jobs = inv.jobs;

    const SweepResult result = run_sweep(spec);
    ensure_dir(inv.out);
    write_text(inv.out / "sweep_summary.csv", sweep_summary_csv(result));
    write_sweep_outputs(inv, result);
    nlohmann::json manifest = base_manifest("sweep");
    manifest["base"] = to_json(spec.base);
    manifest["seeds"] = spec.seeds;
    manifest["aggregation"] = agg;
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& cell : result.cells)
      for (const auto& e : cell.errors) errors.push_back(e);
    manifest["errors"] = errors;
    write_json(inv.out / "manifest.json", manifest);
    if (inv.verbosity > 0) log << sweep_summary_csv(result);
    return exit_code::kOk;
  });
}

int cmd_filter_sim(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    const FilterSimConfig cfg = filter_sim_config_from_json(effective_json(inv, to_json(FilterSimConfig{})));
    ensure_dir(inv.out);
    write_text(inv.out / "filter_sim.csv", filter_sim_csv(filter_sim_trace(cfg)));
    if (cfg.trials > 0) write_text(inv.out / "mse_curve.csv", tracking_mse_csv(tracking_mse_curves(cfg)));
    nlohmann::json manifest = base_manifest("filter-sim");
    manifest["config"] = to_json(cfg);
    manifest["p_inf"] = steady_state_variance(cfg.filter);
    write_json(inv.out / "manifest.json", manifest);
    if (inv.verbosity > 0) log << "wrote " << (inv.out / "filter_sim.csv").string() << '\n';
    return exit_code::kOk;
  });
}

int cmd_golden_check(const CliInvocation& inv, std::ostream& log) {
  return guarded(log, [&] {
    constexpr double kTraceTolerance = 1e-6;
    constexpr double kGradientTolerance = 1e-4;
    const std::filesystem::path dir = inv.fixtures.value_or(KSCORE_DEFAULT_GOLDEN_DIR);
    const auto traces = list_golden_traces(dir);
    bool ok = !traces.empty();
    if (traces.empty()) log << "no golden traces found in " << dir.string() << '\n';
    for (const auto& path : traces) {
      const GoldenComparison cmp = replay_golden_trace(read_golden_trace(path));
      const bool pass = cmp.ok(kTraceTolerance);
      ok = ok && pass;
      log << (pass ? "PASS " : "FAIL ") << path.filename().string() << " steps=" << cmp.rows_compared
          << " max_abs_error=" << cmp.max_abs_error << (cmp.first_mismatch.empty() ? "" : " " + cmp.first_mismatch)
          << '\n';
    }
    const GradientCheckResult grad = gradient_check(50, 0);
    const bool grad_ok = grad.max_relative_error < kGradientTolerance;
    ok = ok && grad_ok;
    log << (grad_ok ? "PASS " : "FAIL ") << "gradient check cases=" << grad.cases << " entries=" << grad.entries
        << " max_relative_error=" << grad.max_relative_error << '\n';
    return ok ? exit_code::kOk : exit_code::kError;
  });
}

int dispatch(const CliInvocation& inv, std::ostream& log) {
  switch (inv.subcommand) {
    case Subcommand::Train: return cmd_train(inv, log);
    case Subcommand::Compare: return cmd_compare(inv, log);
    case Subcommand::AblateQ: return cmd_ablate_q(inv, log);
    case Subcommand::Sweep: return cmd_sweep(inv, log);
    case Subcommand::FilterSim: return cmd_filter_sim(inv, log);
    case Subcommand::GoldenCheck: return cmd_golden_check(inv, log);
  }
  return exit_code::kError;
}

int run(int argc, char** argv) {
  CLI::App app{"Kalman-normalized policy-gradient training and benchmarks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CliInvocation inv;
  std::string config;
  std::string fixtures;
  int seeds = 0;
  bool quiet = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--set", inv.overrides, "KEY=VALUE override (repeatable)");
    sub->add_option("--out", inv.out, "output directory");
    sub->add_flag("-q,--quiet", quiet, "suppress the summary on stdout");
  };
  auto add_runs = [&](CLI::App* sub) {
    sub->add_option("--seeds", seeds, "replicates per cell")->check(CLI::PositiveNumber);
    sub->add_option("--jobs", inv.jobs, "worker threads")->check(CLI::PositiveNumber);
  };

  auto* train = app.add_subcommand("train", "single training run");
  add_common(train);
  auto* compare = app.add_subcommand("compare", "episodes-to-threshold per normalizer");
  add_common(compare);
  add_runs(compare);
  compare->add_option("--normalizers", inv.normalizers, "normalizers, first is the baseline")->delimiter(',');
  auto* ablate = app.add_subcommand("ablate-q", "process-noise ablation at fixed R");
  add_common(ablate);
  add_runs(ablate);
  ablate->add_option("--q-values", inv.q_values, "comma-separated Q values")->delimiter(',');
  auto* sweep = app.add_subcommand("sweep", "grid sweep from a sweep config");
  add_common(sweep);
  add_runs(sweep);
  auto* filter_sim = app.add_subcommand("filter-sim", "filter-only simulation on a synthetic reward stream");
  add_common(filter_sim);
  auto* golden = app.add_subcommand("golden-check", "cart-pole golden traces and gradient check");
  golden->add_option("--fixtures", fixtures, "golden trace directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (train->parsed()) inv.subcommand = Subcommand::Train;
  if (compare->parsed()) inv.subcommand = Subcommand::Compare;
  if (ablate->parsed()) inv.subcommand = Subcommand::AblateQ;
  if (sweep->parsed()) inv.subcommand = Subcommand::Sweep;
  if (filter_sim->parsed()) inv.subcommand = Subcommand::FilterSim;
  if (golden->parsed()) inv.subcommand = Subcommand::GoldenCheck;
  if (!config.empty()) inv.config = config;
  if (!fixtures.empty()) inv.fixtures = fixtures;
  if (seeds > 0) inv.seeds = seeds;
  inv.verbosity = quiet ? 0 : 1;

  std::ostream& log = inv.subcommand == Subcommand::GoldenCheck || !quiet ? std::cout : std::cerr;
  return dispatch(inv, log);
}

}  // namespace kscore::cli
