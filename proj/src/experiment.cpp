#include "oirl/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "oirl/error.hpp"
#include "oirl/metrics.hpp"

namespace oirl {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::Gridworld: return "gridworld";
    case EnvKind::Objectworld: return "objectworld";
    default: return "cleaning";
  }
}

EnvKind parse_env_kind(const std::string& name) {
  if (name == "gridworld") return EnvKind::Gridworld;
  if (name == "objectworld") return EnvKind::Objectworld;
  if (name == "cleaning") return EnvKind::Cleaning;
  throw InvalidModel("unknown environment '" + name + "' (expected gridworld, objectworld or cleaning)");
}

std::string to_string(Preset preset) { return preset == Preset::Paper ? "paper" : "desk"; }

Preset parse_preset(const std::string& name) {
  if (name == "paper") return Preset::Paper;
  if (name == "desk") return Preset::Desk;
  throw InvalidModel("unknown preset '" + name + "' (expected paper or desk)");
}

ExperimentConfig preset_config(EnvKind env, Preset preset) {
  ExperimentConfig cfg;
  cfg.env = env;
  cfg.preset = preset;
  const bool desk = preset == Preset::Desk;
  switch (env) {
    case EnvKind::Gridworld:
      cfg.model = ModelKind::Linear;
      cfg.learning_rate = 1e-5;
      cfg.n_restarts = desk ? 5 : 30;
      cfg.observations = desk ? 20000 : 150000;
      cfg.eval_every = desk ? 100 : 1000;
      break;
    case EnvKind::Objectworld:
      cfg.model = ModelKind::MLP;
      cfg.hidden = {10, 10};
      cfg.learning_rate = 1e-3;
      cfg.n_restarts = desk ? 5 : 30;
      cfg.observations = desk ? 30000 : 150000;
      cfg.eval_every = desk ? 100 : 1000;
      break;
    case EnvKind::Cleaning:
      cfg.width = 16;
      cfg.model = ModelKind::MLP;
      cfg.hidden = {20, 20, 20};
      cfg.learning_rate = 1e-3;
      cfg.n_restarts = 10;
      cfg.observations = 5000;
      cfg.eval_every = 100;
      cfg.compare_linear = true;
      cfg.linear_learning_rate = 1e-5;
      break;
  }
  return cfg;
}

namespace {

template <class T>
void read(const Json& doc, const char* key, T& field) {
  if (doc.contains(key)) field = doc.at(key).get<T>();
}

const std::set<std::string> kKnownKeys = {
    "env",           "preset",        "width",          "noise",
    "discount",      "n_objects",     "n_colors",       "env_seed",
    "layout_path",   "hotspot_radius", "model",         "hidden",
    "confidence",    "approx",        "k",              "learning_rate",
    "n_restarts",    "vi_threshold",  "grad_threshold", "max_iterations",
    "seed",          "threads",       "warm_start",     "init_scale",
    "observations",  "eval_every",    "teleport_every", "record_timing",
    "compare_linear", "linear_learning_rate"};

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("cannot read '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

ExperimentConfig config_from_json(const Json& doc, std::optional<Preset> preset) {
  if (!doc.is_object()) throw InvalidModel("experiment config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) {
      throw InvalidModel("unknown config key '" + item.key() + "'");
    }
  }
  try {
    const EnvKind env = parse_env_kind(doc.value("env", std::string("gridworld")));
    const Preset base = preset ? *preset : parse_preset(doc.value("preset", std::string("paper")));
    ExperimentConfig cfg = preset_config(env, base);
    read(doc, "width", cfg.width);
    read(doc, "noise", cfg.noise);
    read(doc, "discount", cfg.discount);
    read(doc, "n_objects", cfg.n_objects);
    read(doc, "n_colors", cfg.n_colors);
    read(doc, "env_seed", cfg.env_seed);
    read(doc, "layout_path", cfg.layout_path);
    read(doc, "hotspot_radius", cfg.hotspot_radius);
    if (doc.contains("model")) cfg.model = parse_model_kind(doc.at("model").get<std::string>());
    read(doc, "hidden", cfg.hidden);
    read(doc, "confidence", cfg.confidence);
    if (doc.contains("approx")) cfg.approx.kind = parse_approx_kind(doc.at("approx").get<std::string>());
    read(doc, "k", cfg.approx.k);
    read(doc, "learning_rate", cfg.learning_rate);
    read(doc, "n_restarts", cfg.n_restarts);
    read(doc, "vi_threshold", cfg.vi_threshold);
    read(doc, "grad_threshold", cfg.grad_threshold);
    read(doc, "max_iterations", cfg.max_iterations);
    read(doc, "seed", cfg.seed);
    read(doc, "threads", cfg.threads);
    read(doc, "warm_start", cfg.warm_start);
    read(doc, "init_scale", cfg.init_scale);
    read(doc, "observations", cfg.observations);
    read(doc, "eval_every", cfg.eval_every);
    read(doc, "teleport_every", cfg.teleport_every);
    read(doc, "record_timing", cfg.record_timing);
    read(doc, "compare_linear", cfg.compare_linear);
    read(doc, "linear_learning_rate", cfg.linear_learning_rate);
    validate_experiment(cfg);
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel(std::string("malformed experiment config: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& cfg) {
  return {{"env", to_string(cfg.env)},
          {"preset", to_string(cfg.preset)},
          {"width", cfg.width},
          {"noise", cfg.noise},
          {"discount", cfg.discount},
          {"n_objects", cfg.n_objects},
          {"n_colors", cfg.n_colors},
          {"env_seed", cfg.env_seed},
          {"layout_path", cfg.layout_path},
          {"hotspot_radius", cfg.hotspot_radius},
          {"model", to_string(cfg.model)},
          {"hidden", cfg.hidden},
          {"confidence", cfg.confidence},
          {"approx", to_string(cfg.approx.kind)},
          {"k", cfg.approx.k},
          {"learning_rate", cfg.learning_rate},
          {"n_restarts", cfg.n_restarts},
          {"vi_threshold", cfg.vi_threshold},
          {"grad_threshold", cfg.grad_threshold},
          {"max_iterations", cfg.max_iterations},
          {"seed", cfg.seed},
          {"threads", cfg.threads},
          {"warm_start", cfg.warm_start},
          {"init_scale", cfg.init_scale},
          {"observations", cfg.observations},
          {"eval_every", cfg.eval_every},
          {"teleport_every", cfg.teleport_every},
          {"record_timing", cfg.record_timing},
          {"compare_linear", cfg.compare_linear},
          {"linear_learning_rate", cfg.linear_learning_rate}};
}

void validate_experiment(const ExperimentConfig& cfg) {
  if (cfg.observations == 0) throw InvalidModel("observations must be at least 1");
  if (cfg.eval_every == 0) throw InvalidModel("eval_every must be at least 1");
  if (cfg.teleport_every == 0) throw InvalidModel("teleport_every must be at least 1");
  if (cfg.model == ModelKind::MLP && cfg.hidden.empty()) {
    throw InvalidModel("an MLP reward needs at least one hidden layer");
  }
  if (!cfg.layout_path.empty() && !std::filesystem::exists(cfg.layout_path)) {
    throw InvalidModel("layout file '" + cfg.layout_path + "' does not exist");
  }
  validate_config(learner_config(cfg));
}

EnvBundle build_environment(const ExperimentConfig& cfg) {
  switch (cfg.env) {
    case EnvKind::Gridworld: {
      GridSpec spec;
      spec.width = cfg.width;
      spec.noise = cfg.noise;
      spec.discount = cfg.discount;
      return make_gridworld(spec);
    }
    case EnvKind::Objectworld: {
      ObjectworldSpec spec;
      spec.width = cfg.width;
      spec.n_objects = cfg.n_objects;
      spec.n_colors = cfg.n_colors;
      spec.noise = cfg.noise;
      spec.discount = cfg.discount;
      spec.seed = cfg.env_seed;
      return make_objectworld(spec);
    }
    default: {
      CleaningSpec spec;
      if (!cfg.layout_path.empty()) spec.layout = parse_home_layout(read_text(cfg.layout_path));
      spec.noise = cfg.noise;
      spec.discount = cfg.discount;
      spec.hotspot_radius = cfg.hotspot_radius;
      return make_cleaning_home(spec);
    }
  }
}

LearnerConfig learner_config(const ExperimentConfig& cfg) {
  LearnerConfig lc;
  lc.confidence = cfg.confidence;
  lc.approx = cfg.approx;
  lc.learning_rate = cfg.learning_rate;
  lc.n_restarts = cfg.n_restarts;
  lc.value_solve = {cfg.vi_threshold, cfg.max_iterations};
  lc.gradient_solve = {cfg.grad_threshold, cfg.max_iterations};
  lc.seed = cfg.seed;
  lc.threads = cfg.threads;
  lc.warm_start = cfg.warm_start;
  lc.init_scale = cfg.init_scale;
  return lc;
}

RewardModel architecture(const ExperimentConfig& cfg, ModelKind kind, std::size_t n_features) {
  return kind == ModelKind::Linear ? linear_model(n_features) : mlp_model(n_features, cfg.hidden);
}

std::string format_metric_row(const MetricRow& row) {
  std::string line = std::to_string(row.t) + "," + std::to_string(row.best_restart) + "," +
                     format_double(row.best_score) + ",";
  if (row.correlation) line += format_double(*row.correlation);
  line += ",";
  if (row.wall_ms) line += format_double(*row.wall_ms);
  return line;
}

namespace {

Json optional_json(const std::optional<double>& x) { return x ? Json(*x) : Json(nullptr); }

Json learner_summary(const OnlineLearner& learner, const ObserveOutcome& last,
                     const RewardTable& truth) {
  Json restarts = Json::array();
  std::size_t clamps = 0, value_sweeps = 0, gradient_sweeps = 0;
  const auto& state = learner.state();
  for (std::size_t i = 0; i < state.restarts.size(); ++i) {
    const auto& rs = state.restarts[i];
    restarts.push_back({{"index", i},
                        {"score", rs.score},
                        {"value_sweeps", rs.value_sweeps},
                        {"gradient_sweeps", rs.gradient_sweeps},
                        {"clamp_events", rs.stats.clamp_events}});
    clamps += rs.stats.clamp_events;
    value_sweeps += rs.value_sweeps;
    gradient_sweeps += rs.gradient_sweeps;
  }
  return {{"model", to_string(learner.architecture().kind)},
          {"learning_rate", learner.config().learning_rate},
          {"best_restart", last.best_restart},
          {"best_score", last.best_score},
          {"correlation", optional_json(pearson_correlation(last.best_reward, truth))},
          {"clamp_events", clamps},
          {"value_sweeps", value_sweeps},
          {"gradient_sweeps", gradient_sweeps},
          {"restarts", std::move(restarts)}};
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidModel("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

std::ofstream open_csv(const std::filesystem::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw InvalidModel("cannot write '" + path.string() + "'");
  out << header << "\n";
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
  validate_experiment(cfg);
  const EnvBundle env = build_environment(cfg);
  const std::size_t nf = env.features.cols();

  OnlineLearner learner(env.mdp, env.features, architecture(cfg, cfg.model, nf), learner_config(cfg));
  std::optional<OnlineLearner> linear;
  if (cfg.compare_linear) {
    LearnerConfig lc = learner_config(cfg);
    lc.learning_rate = cfg.linear_learning_rate;
    linear.emplace(env.mdp, env.features, linear_model(nf), lc);
  }

  const bool writing = !options.out_dir.empty();
  std::ofstream metrics, metrics_linear, live;
  if (writing) {
    std::filesystem::create_directories(options.out_dir);
    metrics = open_csv(options.out_dir / "metrics.csv", kMetricsHeader);
    if (linear) metrics_linear = open_csv(options.out_dir / "metrics_linear.csv", kMetricsHeader);
    if (options.emit_live) live = open_csv(options.out_dir / "live.csv", "t,best_restart,best_score,correlation");
  }

  ExperimentResult result;
  ObservationStream stream(env, cfg.teleport_every, derive_seed(cfg.seed, 0xD15EA5E));
  ObserveOutcome last, last_linear;
  const auto start = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < cfg.observations; ++i) {
    const Observation obs = stream.next();
    last = learner.observe(obs);
    if (linear) last_linear = linear->observe(obs);

    const bool eval = (i + 1) % cfg.eval_every == 0;
    if (!eval && !options.emit_live) continue;
    MetricRow row{obs.t, last.best_restart, last.best_score,
                  pearson_correlation(last.best_reward, env.true_reward), std::nullopt};
    if (options.emit_live && writing) {
      std::string line = format_metric_row(row);
      line.pop_back();  // live rows carry no wall_ms column
      live << line << std::endl;
    }
    if (!eval) continue;
    if (cfg.record_timing) {
      row.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    if (writing) metrics << format_metric_row(row) << std::endl;
    result.rows.push_back(row);
    if (linear && writing) {
      MetricRow lrow{obs.t, last_linear.best_restart, last_linear.best_score,
                     pearson_correlation(last_linear.best_reward, env.true_reward), row.wall_ms};
      metrics_linear << format_metric_row(lrow) << "\n";
    }
  }

  result.best_model = learner.model(last.best_restart);
  result.best_reward = last.best_reward;
  Json echo = config_to_json(cfg);
  echo.erase("threads");  // scheduling only; the summary must not depend on it
  Json summary = {{"config", std::move(echo)},
                  {"env", env.name},
                  {"n_states", env.mdp.n_states()},
                  {"n_features", nf},
                  {"observations", cfg.observations},
                  {"learner", learner_summary(learner, last, env.true_reward)}};
  if (linear) summary["linear_learner"] = learner_summary(*linear, last_linear, env.true_reward);
  if (cfg.env == EnvKind::Cleaning) {
    const RewardTable uniform(env.true_reward.size(), 1.0);
    Json costs = {{"optimal", cleaning_energy_cost(env.true_reward, env.true_reward)},
                  {"uniform", cleaning_energy_cost(uniform, env.true_reward)},
                  {"learned_" + to_string(cfg.model), cleaning_energy_cost(last.best_reward, env.true_reward)}};
    if (linear) costs["learned_linear"] = cleaning_energy_cost(last_linear.best_reward, env.true_reward);
    summary["energy_costs"] = std::move(costs);
  }
  if (cfg.record_timing) {
    summary["wall_ms"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  }
  result.summary = summary;

  if (writing) {
    write_json(options.out_dir / "summary.json", summary);
    if (options.write_theta) {
      Json theta = {{"restart", last.best_restart}, {"model", model_to_json(result.best_model)}};
      if (linear) {
        theta["linear"] = {{"restart", last_linear.best_restart},
                           {"model", model_to_json(linear->model(last_linear.best_restart))}};
      }
      write_json(options.out_dir / "theta_final.json", theta);
    }
  }
  return result;
}

Json evaluate_model(const ExperimentConfig& cfg, const RewardModel& model) {
  const EnvBundle env = build_environment(cfg);
  validate_model(model);
  const RewardTable r = reward(model, env.features);
  Json out = {{"env", env.name},
              {"model", to_string(model.kind)},
              {"correlation", optional_json(pearson_correlation(r, env.true_reward))}};
  if (cfg.env == EnvKind::Cleaning) {
    out["energy_cost"] = cleaning_energy_cost(r, env.true_reward);
    out["uniform_energy_cost"] =
        cleaning_energy_cost(RewardTable(r.size(), 1.0), env.true_reward);
  }
  return out;
}

}  // namespace oirl
