// Copyright 2026 The lsbre Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line pipeline: solve a game for its stochastic-best-response
// equilibrium, sample demonstrations from it, fit rewards back out of the
// demonstrations, and score the fit. Every command is a pure function of
// (input files, flags, seed): rerunning with the same inputs writes
// byte-identical files.

#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lsbre/airl.hpp"
#include "lsbre/errors.hpp"
#include "lsbre/game.hpp"
#include "lsbre/io.hpp"
#include "lsbre/metrics.hpp"
#include "lsbre/mpl.hpp"
#include "lsbre/rng.hpp"
#include "lsbre/solver.hpp"

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Everything a run needs, resolved from the JSON config file with
// command-line flags taking precedence.
struct Experiment {
  std::string config_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string game_path;           // empty when generated
  lsbre::RandomGameSpec generator; // used when game_path is empty
  std::uint64_t generator_seed = 0;
  bool generated = false;
  lsbre::LsbreConfig lsbre;
  int demo_count = 0;
  std::string method = "mpl";
  double rho = 1e-4;
  lsbre::FitOptions fit;
  lsbre::TrainConfig train;
};

double get_or(const json& doc, const char* key, double fallback) {
  return doc.contains(key) ? doc[key].get<double>() : fallback;
}

int get_or(const json& doc, const char* key, int fallback) {
  return doc.contains(key) ? doc[key].get<int>() : fallback;
}

Experiment load_experiment(const std::string& config_path) {
  const json doc = [&] {
    try {
      return json::parse(lsbre::read_text_file(config_path));
    } catch (const json::parse_error& e) {
      throw lsbre::ValidationError("config: malformed JSON in " + config_path +
                                   ": " + e.what());
    }
  }();
  Experiment exp;
  exp.config_dir = std::filesystem::path(config_path).parent_path().string();
  if (!doc.contains("seed")) {
    throw lsbre::ValidationError("config: seed is mandatory");
  }
  exp.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("out")) exp.out_dir = doc["out"].get<std::string>();

  if (doc.contains("game")) {
    std::filesystem::path p = doc["game"].get<std::string>();
    if (p.is_relative() && !exp.config_dir.empty()) {
      p = std::filesystem::path(exp.config_dir) / p;
    }
    exp.game_path = p.string();
  } else if (doc.contains("generator")) {
    const json& g = doc["generator"];
    if (!g.contains("seed")) {
      throw lsbre::ValidationError("config: generator.seed is mandatory");
    }
    exp.generated = true;
    exp.generator_seed = g["seed"].get<std::uint64_t>();
    exp.generator.n_agents = get_or(g, "n_agents", 2);
    exp.generator.n_states = get_or(g, "n_states", 2);
    if (g.contains("action_counts")) {
      exp.generator.action_counts = g["action_counts"].get<std::vector<int>>();
    }
    exp.generator.horizon = get_or(g, "horizon", 1);
    exp.generator.reward_lo = get_or(g, "reward_lo", -1.0);
    exp.generator.reward_hi = get_or(g, "reward_hi", 1.0);
    exp.generator.discount = get_or(g, "discount", 1.0);
  } else {
    throw lsbre::ValidationError("config: need either game or generator");
  }

  exp.lsbre.lambda = get_or(doc, "lambda", 1.0);
  exp.lsbre.power_iter_tol = get_or(doc, "power_iter_tol", 1e-12);
  exp.lsbre.power_iter_max = get_or(doc, "power_iter_max", 100000);
  exp.demo_count = get_or(doc, "demo_count", 0);
  if (doc.contains("method")) exp.method = doc["method"].get<std::string>();

  if (doc.contains("mpl")) {
    const json& m = doc["mpl"];
    exp.rho = get_or(m, "rho", 1e-4);
    exp.fit.step_size = get_or(m, "step_size", 1.0);
    exp.fit.max_iters = get_or(m, "max_iters", 500);
    exp.fit.grad_tol = get_or(m, "grad_tol", 1e-6);
  }
  if (doc.contains("airl")) {
    const json& a = doc["airl"];
    exp.train.iterations = get_or(a, "iterations", exp.train.iterations);
    exp.train.batch_size = get_or(a, "batch_size", exp.train.batch_size);
    exp.train.disc_step_size = get_or(a, "disc_step_size", exp.train.disc_step_size);
    exp.train.disc_updates = get_or(a, "disc_updates", exp.train.disc_updates);
    exp.train.n_sampler_traj = get_or(a, "n_sampler_traj", exp.train.n_sampler_traj);
    exp.train.checkpoint_every = get_or(a, "checkpoint_every", exp.train.checkpoint_every);
    if (a.contains("reward_mode")) {
      const std::string mode = a["reward_mode"].get<std::string>();
      if (mode == "g_only") {
        exp.train.reward_mode = lsbre::RewardMode::kGOnly;
      } else if (mode == "logit") {
        exp.train.reward_mode = lsbre::RewardMode::kLogit;
      } else {
        throw lsbre::ValidationError("config: airl.reward_mode must be g_only or logit");
      }
    }
  }
  return exp;
}

lsbre::MarkovGame resolve_game(const Experiment& exp) {
  if (!exp.game_path.empty()) return lsbre::load_game(exp.game_path);
  return lsbre::random_game(exp.generator, exp.generator_seed);
}

std::string out_file(const Experiment& exp, const std::string& name) {
  return (std::filesystem::path(exp.out_dir) / name).string();
}

void ensure_out_dir(const Experiment& exp) {
  std::filesystem::create_directories(exp.out_dir);
}

// Refuses to mix artifacts from different games in one output directory.
void check_out_dir_game(const Experiment& exp, const std::string& fingerprint) {
  const std::string stored = out_file(exp, "game.json");
  if (!std::filesystem::exists(stored)) return;
  const std::string existing = lsbre::game_fingerprint(lsbre::load_game(stored));
  if (existing != fingerprint) {
    throw lsbre::ValidationError(
        "out dir holds artifacts for game " + existing +
        " but the config resolves to game " + fingerprint);
  }
}

int run_solve(const Experiment& exp) {
  const lsbre::MarkovGame game = resolve_game(exp);
  const std::string fingerprint = lsbre::game_fingerprint(game);
  ensure_out_dir(exp);
  check_out_dir_game(exp, fingerprint);
  const lsbre::LsbreSolution sol = lsbre::solve_lsbre(game, exp.lsbre);

  lsbre::save_game(game, out_file(exp, "game.json"));
  lsbre::save_solution(sol, exp.lsbre, out_file(exp, "solution.json"));

  std::ostringstream summary;
  summary << "game_fingerprint=" << fingerprint << "\n";
  summary << "lambda=" << fmt17(exp.lsbre.lambda) << "\n";
  summary << "max_residual=" << fmt17(sol.residuals.maxCoeff()) << "\n";
  for (int t = 0; t < game.horizon; ++t) {
    for (int s = 0; s < game.n_states; ++s) {
      Eigen::VectorXd joint = sol.joint.at(t, s);
      double h = 0.0;
      for (int a = 0; a < joint.size(); ++a) {
        if (joint(a) > 0.0) h -= joint(a) * std::log(joint(a));
      }
      summary << "t=" << t + 1 << " s=" << s
              << " residual=" << fmt17(sol.residuals(t, s))
              << " joint_entropy=" << fmt17(h) << "\n";
    }
  }
  lsbre::write_text_file(out_file(exp, "summary.txt"), summary.str());
  std::cout << "solved: max residual " << fmt17(sol.residuals.maxCoeff())
            << ", files in " << exp.out_dir << "\n";
  return 0;
}

int run_gen_demos(const Experiment& exp) {
  const lsbre::MarkovGame game = resolve_game(exp);
  const std::string fingerprint = lsbre::game_fingerprint(game);
  ensure_out_dir(exp);
  check_out_dir_game(exp, fingerprint);
  if (exp.demo_count < 1) {
    throw lsbre::ValidationError("config: demo_count must be >= 1");
  }
  const lsbre::LsbreSolution sol = lsbre::solve_lsbre(game, exp.lsbre);
  const lsbre::DemoSet demos =
      lsbre::sample_demos(game, sol.joint, exp.demo_count,
                          lsbre::derive_seed(exp.seed, "demos"), fingerprint);
  lsbre::save_game(game, out_file(exp, "game.json"));
  lsbre::save_demos(demos, game.actions, out_file(exp, "demos.jsonl"));
  std::cout << "sampled " << demos.size() << " demonstrations into "
            << exp.out_dir << "\n";
  return 0;
}

lsbre::DemoSet load_checked_demos(const Experiment& exp,
                                  const lsbre::MarkovGame& game,
                                  const std::string& fingerprint) {
  const lsbre::DemoSet demos =
      lsbre::load_demos(out_file(exp, "demos.jsonl"), game.actions);
  if (demos.fingerprint != fingerprint) {
    throw lsbre::ValidationError("demos were sampled from game " +
                                 demos.fingerprint + " but the config resolves to " +
                                 fingerprint);
  }
  return demos;
}

int run_irl(const Experiment& exp) {
  const lsbre::MarkovGame game = resolve_game(exp);
  const std::string fingerprint = lsbre::game_fingerprint(game);
  const lsbre::DemoSet demos = load_checked_demos(exp, game, fingerprint);
  ensure_out_dir(exp);

  if (exp.method == "mpl") {
    const lsbre::RewardParams init = lsbre::RewardParams::tabular_zero(
        game.n_agents(), game.n_states, game.n_joint(), exp.rho);
    const lsbre::FitReport report =
        lsbre::fit_mpl(game, demos, init, exp.lsbre, exp.fit);
    lsbre::save_learned_rewards(report.params.reward_tables(), "mpl",
                                exp.lsbre.lambda, out_file(exp, "learned_rewards.json"));
    lsbre::save_fit_report(report, out_file(exp, "fit_report.json"));
    std::cout << "mpl fit: " << report.iterations << " iterations, final gradient norm "
              << fmt17(report.grad_norm_trace.back()) << "\n";
    return 0;
  }
  if (exp.method == "airl") {
    lsbre::TrainConfig tc = exp.train;
    tc.seed = lsbre::derive_seed(exp.seed, "airl");
    auto checkpoint = [&](const lsbre::TrainState& state) {
      char name[64];
      std::snprintf(name, sizeof(name), "train_state_%06d.json", state.iteration);
      lsbre::save_train_state(state, out_file(exp, name));
    };
    const lsbre::TrainState state = lsbre::train(game, demos, tc, checkpoint);
    lsbre::save_learned_rewards(state.discriminators.g.reward_tables(), "airl",
                                exp.lsbre.lambda, out_file(exp, "learned_rewards.json"));
    lsbre::save_train_state(state, out_file(exp, "train_state.json"));
    std::cout << "airl training: " << state.iteration << " iterations\n";
    return 0;
  }
  throw lsbre::ValidationError("config: method must be mpl or airl");
}

int run_eval(const Experiment& exp) {
  const lsbre::MarkovGame game = resolve_game(exp);
  const std::string fingerprint = lsbre::game_fingerprint(game);
  const lsbre::DemoSet demos = load_checked_demos(exp, game, fingerprint);
  const std::vector<Eigen::MatrixXd> learned =
      lsbre::load_learned_rewards(out_file(exp, "learned_rewards.json"));
  if (static_cast<int>(learned.size()) != game.n_agents()) {
    throw lsbre::ValidationError("learned rewards: wrong number of agents");
  }
  for (const auto& table : learned) {
    if (table.rows() != game.n_states || table.cols() != game.n_joint()) {
      throw lsbre::ValidationError("learned rewards: table shape does not match game");
    }
  }
  ensure_out_dir(exp);

  // Correlations are computed on the canonical representatives: rewards are
  // identified only up to per-(s, a_{-i}) shifts, so both sides are centered.
  std::vector<Eigen::MatrixXd> true_centered(game.n_agents());
  std::vector<Eigen::MatrixXd> learned_centered(game.n_agents());
  for (int i = 0; i < game.n_agents(); ++i) {
    true_centered[i] = lsbre::gauge_center(game.rewards[i], game.actions, i);
    learned_centered[i] = lsbre::gauge_center(learned[i], game.actions, i);
  }

  lsbre::MetricReport report;
  report.recovery = lsbre::reward_recovery_report(true_centered, learned_centered, demos);
  for (const auto& row : report.recovery) {
    report.pcc_trajectory_mean += row.pcc_trajectory / report.recovery.size();
    report.scc_trajectory_mean += row.scc_trajectory / report.recovery.size();
  }

  const lsbre::LsbreSolution expert_sol = lsbre::solve_lsbre(game, exp.lsbre);
  lsbre::MarkovGame learned_game = game;
  learned_game.rewards = learned;
  const lsbre::LsbreSolution learned_sol = lsbre::solve_lsbre(learned_game, exp.lsbre);

  // Per-agent policies for cross-play: own-action marginals of each joint.
  std::vector<lsbre::AgentPolicy> expert_side(game.n_agents());
  std::vector<lsbre::AgentPolicy> learned_side(game.n_agents());
  for (int i = 0; i < game.n_agents(); ++i) {
    expert_side[i] = lsbre::marginal_policy(expert_sol.joint, game.actions, i).own;
    learned_side[i] = lsbre::marginal_policy(learned_sol.joint, game.actions, i).own;
  }
  std::vector<std::vector<int>> pairings;
  for (int mask = 0; mask < (1 << game.n_agents()); ++mask) {
    std::vector<int> pairing(game.n_agents());
    std::string label;
    for (int i = 0; i < game.n_agents(); ++i) {
      pairing[i] = (mask >> i) & 1;
      label += pairing[i] == 0 ? "expert" : "learned";
      if (i + 1 < game.n_agents()) label += "_";
    }
    pairings.push_back(std::move(pairing));
    report.pairing_labels.push_back(std::move(label));
  }
  report.cross_returns = lsbre::cross_play(game, expert_side, learned_side, pairings);
  report.occupancy_kl_value =
      lsbre::occupancy_kl(game, expert_sol.joint, learned_sol.joint);
  report.seed = exp.seed;
  report.game_fingerprint = fingerprint;

  lsbre::save_metric_report(report, out_file(exp, "metrics.json"),
                            out_file(exp, "metrics.csv"));
  std::cout << "eval: mean trajectory-level correlation "
            << fmt17(report.pcc_trajectory_mean) << ", occupancy KL "
            << fmt17(report.occupancy_kl_value) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Finite Markov games under logistic stochastic best response:\n"
      "solve, sample demonstrations, invert rewards, and evaluate."};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_override;
  std::string method_override;
  std::uint64_t seed_override = 0;
  double lambda_override = 0.0;

  CLI::Option* opt_config = app.add_option("--config", config_path,
                                           "Experiment config (JSON)");
  CLI::Option* opt_seed = app.add_option("--seed", seed_override,
                                         "Override the config seed");
  CLI::Option* opt_out = app.add_option("--out", out_override,
                                        "Override the output directory");
  CLI::Option* opt_lambda = app.add_option("--lambda", lambda_override,
                                           "Override the rationality parameter");
  CLI::Option* opt_method =
      app.add_option("--method", method_override, "Override the IRL method")
          ->check(CLI::IsMember({"mpl", "airl"}));

  CLI::App* cmd_solve = app.add_subcommand(
      "solve", "Solve a game and write the equilibrium policy");
  CLI::App* cmd_gen = app.add_subcommand(
      "gen-demos", "Sample demonstrations from the solved equilibrium");
  CLI::App* cmd_irl = app.add_subcommand(
      "irl", "Fit reward functions to the sampled demonstrations");
  CLI::App* cmd_eval = app.add_subcommand(
      "eval", "Score learned rewards against the true game");
  CLI::App* cmd_all = app.add_subcommand(
      "run-all", "solve, gen-demos, irl, and eval in sequence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (!*opt_config) {
      throw lsbre::ValidationError("--config is required");
    }
    Experiment exp = load_experiment(config_path);
    if (*opt_seed) exp.seed = seed_override;
    if (*opt_out) exp.out_dir = out_override;
    if (*opt_lambda) exp.lsbre.lambda = lambda_override;
    if (*opt_method) exp.method = method_override;

    if (cmd_solve->parsed()) return run_solve(exp);
    if (cmd_gen->parsed()) return run_gen_demos(exp);
    if (cmd_irl->parsed()) return run_irl(exp);
    if (cmd_eval->parsed()) return run_eval(exp);
    if (cmd_all->parsed()) {
      int rc = run_solve(exp);
      if (rc == 0) rc = run_gen_demos(exp);
      if (rc == 0) rc = run_irl(exp);
      if (rc == 0) rc = run_eval(exp);
      return rc;
    }
    throw lsbre::ValidationError("no subcommand selected");
  } catch (const lsbre::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const lsbre::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
}
