#include "kscore/filter_sim.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "kscore/config.hpp"
#include "kscore/rng.hpp"

namespace kscore {

void FilterSimConfig::validate() const {
  try {
    stream.validate();
    filter.validate();
    AdaptiveConfig{alpha, filter.r, r_floor}.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid filter-sim config: ") + e.what());
  }
  if (!(p0 > 0.0)) throw ConfigError("invalid filter-sim config: p0 must be > 0");
  if (!(epsilon > 0.0)) throw ConfigError("invalid filter-sim config: epsilon must be > 0");
  if (stream.horizon == 0) throw ConfigError("invalid filter-sim config: horizon must be > 0");
}

nlohmann::json to_json(const FilterSimConfig& c) {
  return {{"q_true", c.stream.q_true}, {"r_true", c.stream.r_true}, {"x_init", c.stream.x_init},
          {"horizon", c.stream.horizon}, {"seed", c.stream.seed},     {"q", c.filter.q},
          {"r", c.filter.r},             {"x0", c.x0},                {"p0", c.p0},
          {"alpha", c.alpha},            {"r_floor", c.r_floor},      {"epsilon", c.epsilon},
          {"trials", c.trials},          {"mse_horizon", c.mse_horizon}};
}

FilterSimConfig filter_sim_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("filter-sim config must be a JSON object");
  const nlohmann::json defaults = to_json(FilterSimConfig{});
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw ConfigError("unknown filter-sim key '" + key + "'");
  }
  auto get = [&](const char* key, auto& out) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(out);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("filter-sim key '" + std::string(key) + "': " + e.what());
    }
  };
  FilterSimConfig c;
  get("q_true", c.stream.q_true);
  get("r_true", c.stream.r_true);
  get("x_init", c.stream.x_init);
  get("horizon", c.stream.horizon);
  get("seed", c.stream.seed);
  get("q", c.filter.q);
  get("r", c.filter.r);
  get("x0", c.x0);
  get("p0", c.p0);
  get("alpha", c.alpha);
  get("r_floor", c.r_floor);
  get("epsilon", c.epsilon);
  get("trials", c.trials);
  get("mse_horizon", c.mse_horizon);
  c.validate();
  return c;
}

std::vector<FilterSimRow> filter_sim_trace(const FilterSimConfig& cfg) {
  cfg.validate();
  const RewardStream stream = reward_stream_generate(cfg.stream);
  KalmanFilter fixed(cfg.filter, {cfg.x0, cfg.p0, 0});
  KalmanFilter adaptive(cfg.filter, {cfg.x0, cfg.p0, 0}, AdaptiveConfig{cfg.alpha, cfg.filter.r, cfg.r_floor});
  const double p_inf = steady_state_variance(cfg.filter);

  std::vector<FilterSimRow> rows;
  rows.reserve(stream.observations.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < stream.observations.size(); ++i) {
    const double g = stream.observations[i];
    const double latent = stream.latent[i];
    FilterSimRow row;
    row.t = i + 1;
    row.latent = latent;
    row.observation = g;
    sum += g;
    row.sample_mean = sum / static_cast<double>(row.t);

    const StepDiagnostics d = fixed.observe(g);
    row.kalman_x = fixed.state().x;
    row.kalman_p = fixed.state().p;
    row.kalman_gain = d.gain;
    row.kalman_normalized = normalize(fixed.state(), g, cfg.epsilon);

    const StepDiagnostics da = adaptive.observe(g);
    row.adaptive_x = adaptive.state().x;
    row.adaptive_p = adaptive.state().p;
    row.adaptive_gain = da.gain;
    row.adaptive_r = adaptive.params().r;

    row.sq_err_sample_mean = (row.sample_mean - latent) * (row.sample_mean - latent);
    row.sq_err_kalman = (row.kalman_x - latent) * (row.kalman_x - latent);
    row.sq_err_adaptive = (row.adaptive_x - latent) * (row.adaptive_x - latent);
    row.sigma2_over_t = cfg.stream.r_true / static_cast<double>(row.t);
    row.p_inf = p_inf;
    rows.push_back(row);
  }
  return rows;
}

std::vector<TrackingMSERow> tracking_mse_curves(const FilterSimConfig& cfg) {
  cfg.validate();
  const std::uint64_t horizon = cfg.mse_horizon ? cfg.mse_horizon : cfg.stream.horizon;
  std::vector<TrackingMSERow> rows(horizon);
  if (cfg.trials == 0) return {};
  for (std::uint64_t trial = 0; trial < cfg.trials; ++trial) {
    RewardStreamConfig sc = cfg.stream;
    sc.horizon = horizon;
    sc.seed = stream_seed(cfg.stream.seed, "mse-trial", trial);
    const RewardStream stream = reward_stream_generate(sc);
    KalmanFilter fixed(cfg.filter, {cfg.x0, cfg.p0, 0});
    KalmanFilter adaptive(cfg.filter, {cfg.x0, cfg.p0, 0}, AdaptiveConfig{cfg.alpha, cfg.filter.r, cfg.r_floor});
    double sum = 0.0;
    for (std::uint64_t i = 0; i < horizon; ++i) {
      const double g = stream.observations[i];
      const double latent = stream.latent[i];
      sum += g;
      fixed.observe(g);
      adaptive.observe(g);
      const double em = sum / static_cast<double>(i + 1) - latent;
      const double ek = fixed.state().x - latent;
      const double ea = adaptive.state().x - latent;
      rows[i].sample_mean += em * em;
      rows[i].kalman += ek * ek;
      rows[i].adaptive += ea * ea;
    }
  }
  const double inv = 1.0 / static_cast<double>(cfg.trials);
  for (std::uint64_t i = 0; i < horizon; ++i) {
    rows[i].t = i + 1;
    rows[i].sample_mean *= inv;
    rows[i].kalman *= inv;
    rows[i].adaptive *= inv;
    rows[i].sigma2_over_t = cfg.stream.r_true / static_cast<double>(i + 1);
  }
  return rows;
}

DriftTracking drift_tracking_error(const FilterSimConfig& cfg) {
  cfg.validate();
  const RewardStream stream = reward_stream_generate(cfg.stream);
  KalmanFilter fixed(cfg.filter, {cfg.x0, cfg.p0, 0});
  DriftTracking out;
  double sum = 0.0;
  const auto n = stream.observations.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = stream.observations[i];
    sum += g;
    fixed.observe(g);
    const double em = sum / static_cast<double>(i + 1) - stream.latent[i];
    const double ek = fixed.state().x - stream.latent[i];
    out.sample_mean += em * em;
    out.kalman += ek * ek;
  }
  out.sample_mean /= static_cast<double>(n);
  out.kalman /= static_cast<double>(n);
  return out;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace

std::string filter_sim_csv(const std::vector<FilterSimRow>& rows) {
  std::ostringstream out;
  out << "t,latent,observation,sample_mean,kalman_x,kalman_P,kalman_K,kalman_normalized,adaptive_x,adaptive_P,"
         "adaptive_K,adaptive_R,sq_err_sample_mean,sq_err_kalman,sq_err_adaptive,sigma2_over_t,p_inf\n";
  for (const auto& r : rows) {
    out << r.t << ',' << fmt(r.latent) << ',' << fmt(r.observation) << ',' << fmt(r.sample_mean) << ','
        << fmt(r.kalman_x) << ',' << fmt(r.kalman_p) << ',' << fmt(r.kalman_gain) << ',' << fmt(r.kalman_normalized)
        << ',' << fmt(r.adaptive_x) << ',' << fmt(r.adaptive_p) << ',' << fmt(r.adaptive_gain) << ','
        << fmt(r.adaptive_r) << ',' << fmt(r.sq_err_sample_mean) << ',' << fmt(r.sq_err_kalman) << ','
        << fmt(r.sq_err_adaptive) << ',' << fmt(r.sigma2_over_t) << ',' << fmt(r.p_inf) << '\n';
  }
  return out.str();
}

std::string tracking_mse_csv(const std::vector<TrackingMSERow>& rows) {
  std::ostringstream out;
  out << "t,mse_sample_mean,mse_kalman,mse_adaptive,sigma2_over_t\n";
  for (const auto& r : rows) {
    out << r.t << ',' << fmt(r.sample_mean) << ',' << fmt(r.kalman) << ',' << fmt(r.adaptive) << ','
        << fmt(r.sigma2_over_t) << '\n';
  }
  return out.str();
}

}  // namespace kscore
