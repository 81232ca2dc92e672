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

#ifndef LSBRE_IO_HPP_
#define LSBRE_IO_HPP_

#include <string>
#include <vector>

#include "lsbre/airl.hpp"
#include "lsbre/game.hpp"
#include "lsbre/metrics.hpp"
#include "lsbre/mpl.hpp"
#include "lsbre/solver.hpp"

namespace lsbre {

// Game file: one JSON document with fields n_agents, action_counts, states,
// transition ([s][joint_a][s']), rewards ([i][s][joint_a]), initial_dist,
// horizon, discount. Loading validates the game.
MarkovGame load_game(const std::string& path);
void save_game(const MarkovGame& game, const std::string& path);
MarkovGame game_from_json_text(const std::string& text);
std::string game_to_json_text(const MarkovGame& game);

// FNV-1a hash (hex) of the canonical JSON serialization of the game.
std::string game_fingerprint(const MarkovGame& game);

// Demo file: a JSON header line {"fingerprint": ..., "seed": ...} followed by
// one trajectory per line, each an array of [state, [a_1, .., a_N]] pairs.
// The action space is needed to pack and unpack the per-agent profiles.
DemoSet load_demos(const std::string& path, const ActionSpace& actions);
void save_demos(const DemoSet& demos, const ActionSpace& actions,
                const std::string& path);

void save_solution(const LsbreSolution& sol, const LsbreConfig& cfg,
                   const std::string& path);

// Learned rewards: {"method": ..., "lambda": ..., "rewards": [i][s][joint_a]}.
void save_learned_rewards(const std::vector<Eigen::MatrixXd>& rewards,
                          const std::string& method, double lambda,
                          const std::string& path);
std::vector<Eigen::MatrixXd> load_learned_rewards(const std::string& path);

void save_fit_report(const FitReport& report, const std::string& path);

void save_train_state(const TrainState& state, const std::string& path);
SamplerPolicies load_sampler_policies(const std::string& path);

void save_metric_report(const MetricReport& report, const std::string& json_path,
                        const std::string& csv_path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace lsbre

#endif  // LSBRE_IO_HPP_
