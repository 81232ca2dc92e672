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

#include "lsbre/io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace lsbre {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows, const char* what) {
  if (!rows.is_array() || rows.empty()) {
    throw ValidationError(std::string("file: ") + what + " must be a nonempty array");
  }
  const std::size_t n_cols = rows[0].size();
  Eigen::MatrixXd m(rows.size(), n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != n_cols) {
      throw ValidationError(std::string("file: ragged rows in ") + what);
    }
    for (std::size_t c = 0; c < n_cols; ++c) m(r, c) = rows[r][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(v(k));
  return arr;
}

Eigen::VectorXd vector_from_json(const json& arr, const char* what) {
  if (!arr.is_array()) {
    throw ValidationError(std::string("file: ") + what + " must be an array");
  }
  Eigen::VectorXd v(arr.size());
  for (std::size_t k = 0; k < arr.size(); ++k) v(k) = arr[k].get<double>();
  return v;
}

json parse(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // e.what() carries the line and column of the first bad token.
    throw ValidationError(std::string("file: malformed JSON in ") + what + ": " +
                          e.what());
  }
}

// Converts stray type errors (a string where a number belongs, etc.) into
// the library's validation error so the CLI maps them to exit code 2.
[[noreturn]] void rethrow_as_validation(const char* what, const json::exception& e) {
  throw ValidationError(std::string("file: invalid ") + what + ": " + e.what());
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int k = 15; k >= 0; --k) {
    out[k] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

json agent_matrices_to_json(const std::vector<Eigen::MatrixXd>& tables) {
  json arr = json::array();
  for (const auto& m : tables) arr.push_back(matrix_to_json(m));
  return arr;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("file: cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("file: cannot write " + path);
  out << text;
}

std::string game_to_json_text(const MarkovGame& game) {
  json doc;
  doc["n_agents"] = game.n_agents();
  doc["action_counts"] = game.actions.counts();
  doc["states"] = game.n_states;
  json transition = json::array();
  for (const auto& block : game.transition) transition.push_back(matrix_to_json(block));
  doc["transition"] = std::move(transition);
  doc["rewards"] = agent_matrices_to_json(game.rewards);
  doc["initial_dist"] = vector_to_json(game.initial_dist);
  doc["horizon"] = game.horizon;
  doc["discount"] = game.discount;
  return doc.dump(2) + "\n";
}

MarkovGame game_from_json_text(const std::string& text) try {
  const json doc = parse(text, "game");
  for (const char* key : {"n_agents", "action_counts", "states", "transition",
                          "rewards", "initial_dist", "horizon", "discount"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("game file: missing field ") + key);
    }
  }
  MarkovGame game;
  const int n_agents = doc["n_agents"].get<int>();
  std::vector<int> counts = doc["action_counts"].get<std::vector<int>>();
  if (static_cast<int>(counts.size()) != n_agents) {
    throw ValidationError("game file: action_counts length must equal n_agents");
  }
  game.actions = ActionSpace(counts);
  game.n_states = doc["states"].get<int>();
  game.horizon = doc["horizon"].get<int>();
  game.discount = doc["discount"].get<double>();
  if (!doc["transition"].is_array() ||
      static_cast<int>(doc["transition"].size()) != game.n_states) {
    throw ValidationError("game file: transition must have one block per state");
  }
  for (const auto& block : doc["transition"]) {
    game.transition.push_back(matrix_from_json(block, "transition"));
  }
  if (!doc["rewards"].is_array() ||
      static_cast<int>(doc["rewards"].size()) != n_agents) {
    throw ValidationError("game file: rewards must have one table per agent");
  }
  for (const auto& table : doc["rewards"]) {
    game.rewards.push_back(matrix_from_json(table, "rewards"));
  }
  game.initial_dist = vector_from_json(doc["initial_dist"], "initial_dist");
  validate_game(game);
  return game;
} catch (const nlohmann::json::exception& e) {
  rethrow_as_validation("game", e);
}

MarkovGame load_game(const std::string& path) {
  return game_from_json_text(read_text_file(path));
}

void save_game(const MarkovGame& game, const std::string& path) {
  write_text_file(path, game_to_json_text(game));
}

std::string game_fingerprint(const MarkovGame& game) {
  return hex64(fnv1a(game_to_json_text(game)));
}

DemoSet load_demos(const std::string& path, const ActionSpace& actions) try {
  std::istringstream in(read_text_file(path));
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("demo file: empty " + path);
  const json header = parse(line, "demo header");
  if (!header.contains("seed") || !header.contains("fingerprint")) {
    throw ValidationError("demo file: header must carry seed and fingerprint");
  }
  DemoSet demos;
  demos.seed = header["seed"].get<std::uint64_t>();
  demos.fingerprint = header["fingerprint"].get<std::string>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json steps = parse(line, "demo trajectory");
    if (!steps.is_array() || steps.empty()) {
      throw ValidationError("demo file: trajectory line must be a nonempty array");
    }
    Trajectory traj;
    traj.states.resize(steps.size());
    traj.actions.resize(steps.size());
    for (std::size_t t = 0; t < steps.size(); ++t) {
      if (!steps[t].is_array() || steps[t].size() != 2) {
        throw ValidationError("demo file: each step must be [state, profile]");
      }
      traj.states(t) = steps[t][0].get<int>();
      const std::vector<int> profile = steps[t][1].get<std::vector<int>>();
      if (static_cast<int>(profile.size()) != actions.n_agents()) {
        throw ValidationError("demo file: action profile has wrong length");
      }
      for (int i = 0; i < actions.n_agents(); ++i) {
        if (profile[i] < 0 || profile[i] >= actions.count(i)) {
          throw ValidationError("demo file: action index out of range");
        }
      }
      traj.actions(t) = actions.flatten(profile);
    }
    demos.trajectories.push_back(std::move(traj));
  }
  if (demos.size() < 1) throw ValidationError("demo file: no trajectories in " + path);
  return demos;
} catch (const nlohmann::json::exception& e) {
  rethrow_as_validation("demo file", e);
}

void save_demos(const DemoSet& demos, const ActionSpace& actions,
                const std::string& path) {
  std::ostringstream out;
  json header;
  header["seed"] = demos.seed;
  header["fingerprint"] = demos.fingerprint;
  out << header.dump() << "\n";
  for (const auto& traj : demos.trajectories) {
    json steps = json::array();
    for (int t = 0; t < traj.length(); ++t) {
      steps.push_back(json::array(
          {traj.states(t), actions.unflatten(traj.actions(t))}));
    }
    out << steps.dump() << "\n";
  }
  write_text_file(path, out.str());
}

void save_solution(const LsbreSolution& sol, const LsbreConfig& cfg,
                   const std::string& path) {
  json doc;
  doc["config"] = {{"lambda", cfg.lambda},
                   {"power_iter_tol", cfg.power_iter_tol},
                   {"power_iter_max", cfg.power_iter_max}};
  json joint = json::array();
  for (const auto& step : sol.joint.table) {
    json per_state = json::array();
    for (const auto& dist : step) per_state.push_back(vector_to_json(dist));
    joint.push_back(std::move(per_state));
  }
  doc["joint"] = std::move(joint);
  json conditionals = json::array();
  for (const auto& agent : sol.conditionals.agents) {
    json per_t = json::array();
    for (const auto& step : agent) {
      json per_state = json::array();
      for (const auto& c : step) per_state.push_back(matrix_to_json(c));
      per_t.push_back(std::move(per_state));
    }
    conditionals.push_back(std::move(per_t));
  }
  doc["conditionals"] = std::move(conditionals);
  json soft_q = json::array();
  for (const auto& agent : sol.soft_q.q) {
    json per_t = json::array();
    for (const auto& table : agent) per_t.push_back(matrix_to_json(table));
    soft_q.push_back(std::move(per_t));
  }
  doc["soft_q"] = std::move(soft_q);
  doc["residuals"] = matrix_to_json(sol.residuals);
  write_text_file(path, doc.dump(2) + "\n");
}

void save_learned_rewards(const std::vector<Eigen::MatrixXd>& rewards,
                          const std::string& method, double lambda,
                          const std::string& path) {
  json doc;
  doc["method"] = method;
  doc["lambda"] = lambda;
  doc["rewards"] = agent_matrices_to_json(rewards);
  write_text_file(path, doc.dump(2) + "\n");
}

std::vector<Eigen::MatrixXd> load_learned_rewards(const std::string& path) try {
  const json doc = parse(read_text_file(path), "learned rewards");
  if (!doc.contains("rewards") || !doc["rewards"].is_array()) {
    throw ValidationError("learned rewards file: missing rewards tables");
  }
  std::vector<Eigen::MatrixXd> out;
  for (const auto& table : doc["rewards"]) {
    out.push_back(matrix_from_json(table, "rewards"));
  }
  return out;
} catch (const nlohmann::json::exception& e) {
  rethrow_as_validation("learned rewards", e);
}

void save_fit_report(const FitReport& report, const std::string& path) {
  json doc;
  doc["iterations"] = report.iterations;
  doc["converged"] = report.converged;
  doc["objective_trace"] = report.objective_trace;
  doc["grad_norm_trace"] = report.grad_norm_trace;
  doc["rho"] = report.params.rho;
  if (report.params.kind == RewardParams::Kind::kTabular) {
    doc["kind"] = "tabular";
    doc["tables"] = agent_matrices_to_json(report.params.tables);
  } else {
    doc["kind"] = "linear";
    json weights = json::array();
    for (const auto& w : report.params.weights) weights.push_back(vector_to_json(w));
    doc["weights"] = std::move(weights);
  }
  write_text_file(path, doc.dump(2) + "\n");
}

void save_train_state(const TrainState& state, const std::string& path) {
  json doc;
  doc["iteration"] = state.iteration;
  doc["seed"] = state.seed;
  doc["gamma"] = state.discriminators.gamma;
  doc["g"] = agent_matrices_to_json(state.discriminators.g.reward_tables());
  json h = json::array();
  for (const auto& hv : state.discriminators.h) h.push_back(vector_to_json(hv));
  doc["h"] = std::move(h);
  json samplers = json::array();
  for (const auto& agent : state.samplers) samplers.push_back(agent_matrices_to_json(agent));
  doc["samplers"] = std::move(samplers);
  doc["disc_loss_trace"] = state.disc_loss_trace;
  doc["return_trace"] = state.return_trace;
  write_text_file(path, doc.dump(2) + "\n");
}

SamplerPolicies load_sampler_policies(const std::string& path) try {
  const json doc = parse(read_text_file(path), "train state");
  if (!doc.contains("samplers") || !doc["samplers"].is_array()) {
    throw ValidationError("train state file: missing samplers");
  }
  SamplerPolicies out;
  for (const auto& agent : doc["samplers"]) {
    AgentPolicy policy;
    for (const auto& step : agent) policy.push_back(matrix_from_json(step, "samplers"));
    out.push_back(std::move(policy));
  }
  return out;
} catch (const nlohmann::json::exception& e) {
  rethrow_as_validation("train state", e);
}

void save_metric_report(const MetricReport& report, const std::string& json_path,
                        const std::string& csv_path) {
  json doc;
  json recovery = json::array();
  for (const auto& row : report.recovery) {
    recovery.push_back({{"pcc_trajectory", row.pcc_trajectory},
                        {"scc_trajectory", row.scc_trajectory},
                        {"pcc_step", row.pcc_step},
                        {"scc_step", row.scc_step}});
  }
  doc["recovery"] = std::move(recovery);
  doc["pcc_trajectory_mean"] = report.pcc_trajectory_mean;
  doc["scc_trajectory_mean"] = report.scc_trajectory_mean;
  doc["pairing_labels"] = report.pairing_labels;
  doc["cross_returns"] = matrix_to_json(report.cross_returns);
  doc["occupancy_kl"] = report.occupancy_kl_value;
  doc["seed"] = report.seed;
  doc["game_fingerprint"] = report.game_fingerprint;
  write_text_file(json_path, doc.dump(2) + "\n");
  write_text_file(csv_path, report.to_csv());
}

}  // namespace lsbre
