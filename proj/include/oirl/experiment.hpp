#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oirl/environments.hpp"
#include "oirl/learner.hpp"
#include "oirl/serialize.hpp"

namespace oirl {

enum class EnvKind { Gridworld, Objectworld, Cleaning };
enum class Preset { Paper, Desk };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(const std::string& name);
std::string to_string(Preset preset);
Preset parse_preset(const std::string& name);

/**
 * Everything one experiment needs. Read from a flat JSON document in which
 * every key is optional; missing keys take the preset's value for the chosen
 * environment.
 */
struct ExperimentConfig {
  EnvKind env = EnvKind::Gridworld;
  Preset preset = Preset::Paper;

  // environment
  std::size_t width = 10;
  double noise = 0.3;
  double discount = 0.9;
  std::size_t n_objects = 2;
  std::size_t n_colors = 2;
  std::uint64_t env_seed = 0;
  std::string layout_path;  // cleaning only; empty for the built-in home
  int hotspot_radius = 2;

  // reward model
  ModelKind model = ModelKind::Linear;
  std::vector<std::size_t> hidden;

  // learner
  double confidence = 1.0;
  ApproxSpec approx{ApproxKind::GSoft, 100.0};
  double learning_rate = 1e-5;
  std::size_t n_restarts = 30;
  double vi_threshold = 1e-6;
  double grad_threshold = 1e-6;
  std::size_t max_iterations = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool warm_start = true;
  double init_scale = 1.0;

  // stream and evaluation
  std::size_t observations = 150000;
  std::size_t eval_every = 1000;
  std::size_t teleport_every = 3;
  bool record_timing = false;  // fills wall_ms; makes metrics.csv run-dependent

  // cleaning comparison: a linear learner on the same stream
  bool compare_linear = false;
  double linear_learning_rate = 1e-5;
};

/// Defaults of the given preset for one environment.
ExperimentConfig preset_config(EnvKind env, Preset preset);

/**
 * Parses a config document. "env" and "preset" pick the base values (the
 * `preset` argument, when set, overrides the document's); every other key
 * overrides one field. Unknown keys and missing referenced files are errors.
 */
ExperimentConfig config_from_json(const Json& doc, std::optional<Preset> preset = std::nullopt);
Json config_to_json(const ExperimentConfig& cfg);
/// Throws InvalidModel when a field is out of range.
void validate_experiment(const ExperimentConfig& cfg);

EnvBundle build_environment(const ExperimentConfig& cfg);
LearnerConfig learner_config(const ExperimentConfig& cfg);
RewardModel architecture(const ExperimentConfig& cfg, ModelKind kind, std::size_t n_features);

struct MetricRow {
  long long t = 0;
  std::size_t best_restart = 0;
  double best_score = 0.0;
  std::optional<double> correlation;  // empty when undefined
  std::optional<double> wall_ms;      // empty unless timing is recorded
};

inline constexpr const char* kMetricsHeader = "t,best_restart,best_score,correlation,wall_ms";

std::string format_metric_row(const MetricRow& row);

struct RunOptions {
  std::filesystem::path out_dir;  // empty: write nothing
  bool emit_live = false;         // live.csv, one flushed row per observation
  bool write_theta = true;
};

struct ExperimentResult {
  std::vector<MetricRow> rows;
  Json summary;
  RewardModel best_model;
  RewardTable best_reward;
};

/// Streams observations through the learner and writes metrics.csv,
/// summary.json and theta_final.json under options.out_dir.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

/// Correlation (and, for the cleaning home, energy costs) of a parameter snapshot.
Json evaluate_model(const ExperimentConfig& cfg, const RewardModel& model);

}  // namespace oirl
