// oirl command-line front end: gen, learn, eval, clean-demo.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "oirl/error.hpp"
#include "oirl/experiment.hpp"
#include "oirl/serialize.hpp"

using namespace oirl;

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string preset;
  std::string out_dir = "out";
  std::string env;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_env) {
  cmd->add_option("--config", flags.config_path, "experiment config (flat JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "learner seed, overrides the config");
  cmd->add_option("--preset", flags.preset, "base values")->check(CLI::IsMember({"paper", "desk"}));
  cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
  if (with_env) {
    cmd->add_option("--env", flags.env, "environment, overrides the config")
        ->check(CLI::IsMember({"gridworld", "objectworld", "cleaning"}));
  }
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidModel("cannot read '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel("'" + path + "' is not valid JSON: " + e.what());
  }
}

ExperimentConfig load_config(const CommonFlags& flags, const char* forced_env = nullptr) {
  Json doc = flags.config_path.empty() ? Json::object() : read_json(flags.config_path);
  if (!flags.env.empty()) doc["env"] = flags.env;
  if (forced_env) doc["env"] = forced_env;
  if (flags.seed) doc["seed"] = *flags.seed;
  std::optional<Preset> preset;
  if (!flags.preset.empty()) preset = parse_preset(flags.preset);
  return config_from_json(doc, preset);
}

void write_json(const std::filesystem::path& path, const Json& doc) {
  std::ofstream out(path);
  if (!out) throw InvalidModel("cannot write '" + path.string() + "'");
  out << doc.dump(2) << "\n";
}

void print_final(const ExperimentResult& result) {
  const auto& learner = result.summary.at("learner");
  std::ostringstream line;
  line << "observations " << result.summary.at("observations") << ", best restart "
       << learner.at("best_restart") << ", correlation " << learner.at("correlation");
  std::cout << line.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online inverse reinforcement learning via Bellman gradient iteration"};
  app.require_subcommand(1);

  CommonFlags gen_flags, learn_flags, eval_flags, clean_flags;
  std::size_t gen_observations = 0;
  bool gen_dump_solve = false;
  bool learn_live = false, clean_live = false;
  std::string theta_path;

  auto* gen = app.add_subcommand("gen", "write an environment bundle (env.json)");
  add_common(gen, gen_flags, true);
  gen->add_option("--observations", gen_observations, "also write this many observations to observations.csv");
  gen->add_flag("--dump-solve", gen_dump_solve, "write exact and smoothed solves of the true reward to solve.json");

  auto* learn = app.add_subcommand("learn", "run online IRL from a config");
  add_common(learn, learn_flags, true);
  learn->add_flag("--emit-live", learn_live, "write live.csv with one flushed row per observation");

  auto* eval = app.add_subcommand("eval", "recompute metrics from a theta snapshot");
  add_common(eval, eval_flags, true);
  eval->add_option("--theta", theta_path, "theta_final.json from a learn run")->required()->check(CLI::ExistingFile);

  auto* clean = app.add_subcommand("clean-demo", "cleaning-robot energy comparison");
  add_common(clean, clean_flags, false);
  clean->add_flag("--emit-live", clean_live, "write live.csv with one flushed row per observation");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const ExperimentConfig cfg = load_config(gen_flags);
      const EnvBundle env = build_environment(cfg);
      const std::filesystem::path out = gen_flags.out_dir;
      std::filesystem::create_directories(out);
      write_json(out / "env.json", env_to_json(env));
      if (gen_observations > 0) {
        std::ofstream csv(out / "observations.csv");
        csv << "t,state,action\n";
        for (const auto& o : generate_observations(env, gen_observations, cfg.teleport_every, cfg.seed)) {
          csv << o.t << "," << o.state << "," << o.action << "\n";
        }
      }
      if (gen_dump_solve) {
        const SolveOptions opts{cfg.vi_threshold, cfg.max_iterations};
        const auto exact = exact_value_iteration(env.mdp, env.true_reward, opts);
        const auto approx = approximate_value_iteration(env.mdp, env.true_reward, cfg.approx, opts);
        const auto grad = bellman_gradient_iteration(env.mdp, approx.q, env.features, cfg.approx,
                                                     {cfg.grad_threshold, cfg.max_iterations});
        write_json(out / "solve.json", {{"exact", solve_result_to_json(exact)},
                                        {"approximate", solve_result_to_json(approx)},
                                        {"gradient_wrt_linear_theta",
                                         grad_result_to_json(grad, env.mdp.n_actions())}});
      }
      std::cout << env.name << ": " << env.mdp.n_states() << " states, " << env.features.cols()
                << " features -> " << (out / "env.json").string() << "\n";
    } else if (*learn || *clean) {
      const bool is_clean = static_cast<bool>(*clean);
      const CommonFlags& flags = is_clean ? clean_flags : learn_flags;
      const ExperimentConfig cfg = load_config(flags, is_clean ? "cleaning" : nullptr);
      RunOptions opts;
      opts.out_dir = flags.out_dir;
      opts.emit_live = is_clean ? clean_live : learn_live;
      const auto result = run_experiment(cfg, opts);
      print_final(result);
      if (result.summary.contains("energy_costs")) {
        std::cout << "energy costs " << result.summary.at("energy_costs").dump() << "\n";
      }
    } else if (*eval) {
      const ExperimentConfig cfg = load_config(eval_flags);
      const Json snapshot = read_json(theta_path);
      Json out = {{"primary", evaluate_model(cfg, model_from_json(snapshot.at("model")))}};
      if (snapshot.contains("linear")) {
        out["linear"] = evaluate_model(cfg, model_from_json(snapshot.at("linear").at("model")));
      }
      std::filesystem::create_directories(eval_flags.out_dir);
      write_json(std::filesystem::path(eval_flags.out_dir) / "eval.json", out);
      std::cout << out.dump(2) << "\n";
    }
  } catch (const LearnerError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
