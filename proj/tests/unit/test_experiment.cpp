#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "oirl/error.hpp"
#include "oirl/experiment.hpp"
#include "oirl/serialize.hpp"
#include "test_support.hpp"

using namespace oirl;

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("oirl_unit_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_SUITE("harness-cli") {
  TEST_CASE("mdp and model documents round-trip bit-exactly") {
    Rng rng(4);
    const auto mdp = testing::random_mdp(rng, 5, 3, 0.85);
    const auto back = mdp_from_json(Json::parse(mdp_to_json(mdp).dump()));
    CHECK(back.n_states() == 5);
    CHECK(back.discount() == 0.85);
    for (std::size_t s = 0; s < 5; ++s)
      for (std::size_t a = 0; a < 3; ++a)
        for (std::size_t n = 0; n < 5; ++n) CHECK(back.prob(s, a, n) == mdp.prob(s, a, n));

    RewardModel model{ModelKind::MLP, {3, 4, 1}, init_params(ModelKind::MLP, {3, 4, 1}, 9)};
    const auto reloaded = model_from_json(Json::parse(model_to_json(model).dump()));
    CHECK(reloaded.kind == model.kind);
    CHECK(reloaded.layers == model.layers);
    CHECK(reloaded.theta == model.theta);
  }

  TEST_CASE("malformed mdp documents are rejected") {
    CHECK_THROWS_AS(mdp_from_json(Json::parse(R"({"n_states": 1})")), InvalidModel);
    const auto bad = Json::parse(R"({"n_states":1,"n_actions":1,"discount":0.9,"transitions":[[[0.5]]]})");
    CHECK_THROWS_AS(mdp_from_json(bad), InvalidModel);
  }

  TEST_CASE("config parsing applies presets, overrides and rejects unknown keys") {
    const auto cfg = config_from_json(Json::parse(R"({"env":"objectworld","n_restarts":3})"), Preset::Desk);
    CHECK(cfg.env == EnvKind::Objectworld);
    CHECK(cfg.preset == Preset::Desk);
    CHECK(cfg.model == ModelKind::MLP);
    CHECK(cfg.n_restarts == 3);
    CHECK(cfg.learning_rate == 1e-3);

    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"learnig_rate":0.1})")), InvalidModel);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"env":"mars"})")), InvalidModel);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"observations":0})")), InvalidModel);
    CHECK_THROWS_AS(config_from_json(Json::parse(R"({"env":"cleaning","layout_path":"/nonexistent/home.txt"})")),
                    InvalidModel);

    const auto echoed = config_from_json(config_to_json(cfg));
    CHECK(config_to_json(echoed) == config_to_json(cfg));
  }

  TEST_CASE("metric rows format with empty optional fields") {
    MetricRow row{200, 3, -1.5, std::nullopt, std::nullopt};
    CHECK(format_metric_row(row) == "200,3,-1.5,,");
    row.correlation = 0.25;
    row.wall_ms = 12.0;
    CHECK(format_metric_row(row) == "200,3,-1.5,0.25,12");
  }

  TEST_CASE("a short run writes one row per evaluation interval") {
    auto cfg = preset_config(EnvKind::Gridworld, Preset::Desk);
    cfg.n_restarts = 2;
    cfg.observations = 200;
    cfg.eval_every = 50;
    const auto dir = scratch_dir("short_run");
    const auto result = run_experiment(cfg, {dir, false, true});
    REQUIRE(result.rows.size() == 4);
    CHECK(result.rows.back().t == 200);

    std::istringstream csv(slurp(dir / "metrics.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == kMetricsHeader);
    int rows = 0;
    while (std::getline(csv, line)) ++rows;
    CHECK(rows == 4);

    const auto summary = Json::parse(slurp(dir / "summary.json"));
    CHECK(summary == result.summary);
    CHECK(summary["observations"] == 200);
    CHECK(!summary.contains("wall_ms"));
    CHECK(std::filesystem::exists(dir / "theta_final.json"));
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("runs are reproducible for a fixed seed") {
    auto cfg = preset_config(EnvKind::Gridworld, Preset::Desk);
    cfg.n_restarts = 2;
    cfg.observations = 60;
    cfg.eval_every = 20;
    cfg.seed = 17;
    const auto dir_a = scratch_dir("repro_a"), dir_b = scratch_dir("repro_b");
    const auto a = run_experiment(cfg, {dir_a, false, false});
    const auto b = run_experiment(cfg, {dir_b, false, false});
    CHECK(slurp(dir_a / "metrics.csv") == slurp(dir_b / "metrics.csv"));
    CHECK(a.summary == b.summary);
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
  }
}
