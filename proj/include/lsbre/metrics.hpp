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

#ifndef LSBRE_METRICS_HPP_
#define LSBRE_METRICS_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsbre/game.hpp"

namespace lsbre {

// Sample Pearson correlation. Throws NumericalError on zero variance.
double pcc(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Spearman rank correlation with tie-averaged ranks.
double scc(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Ranks 1..n with ties replaced by the average of the tied positions.
Eigen::VectorXd tie_averaged_ranks(const Eigen::VectorXd& x);

// Correlations between true and learned per-trajectory returns (the primary
// metric) and between per-step rewards (secondary, for debugging).
struct RecoveryRow {
  double pcc_trajectory = 0.0;
  double scc_trajectory = 0.0;
  double pcc_step = 0.0;
  double scc_step = 0.0;
};
std::vector<RecoveryRow> reward_recovery_report(const RewardStack& true_rewards,
                                                const RewardStack& learned_rewards,
                                                const DemoSet& demos);
std::vector<RecoveryRow> reward_recovery_report(
    const std::vector<Eigen::MatrixXd>& true_rewards,
    const std::vector<Eigen::MatrixXd>& learned_rewards, const DemoSet& demos);

// Exact expected returns of product policies mixing two per-agent policy
// sets. pairings[p][i] selects agent i's policy: 0 = side_a, 1 = side_b.
// Returns an (n_pairings x n_agents) table of expected returns.
Eigen::MatrixXd cross_play(const MarkovGame& game,
                           const std::vector<AgentPolicy>& side_a,
                           const std::vector<AgentPolicy>& side_b,
                           const std::vector<std::vector<int>>& pairings);

// KL divergence between the exact (t, s, joint-a) occupancy measures of two
// joint policies under the game dynamics, each normalized to a probability
// distribution by 1/T. Throws NumericalError when p puts mass where q has
// none.
double occupancy_kl(const MarkovGame& game, const JointPolicy& p,
                    const JointPolicy& q);

struct MetricReport {
  std::vector<RecoveryRow> recovery;       // one row per agent
  double pcc_trajectory_mean = 0.0;
  double scc_trajectory_mean = 0.0;
  std::vector<std::string> pairing_labels;
  Eigen::MatrixXd cross_returns;           // (n_pairings x n_agents)
  double occupancy_kl_value = 0.0;
  std::uint64_t seed = 0;
  std::string game_fingerprint;

  // One row per agent per metric, 17 significant digits.
  std::string to_csv() const;
};

}  // namespace lsbre

#endif  // LSBRE_METRICS_HPP_
