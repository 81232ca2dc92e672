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

#include "lsbre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace lsbre {

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double pcc(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("pcc: vectors must have equal length >= 2");
  }
  const Eigen::VectorXd xc = x.array() - x.mean();
  const Eigen::VectorXd yc = y.array() - y.mean();
  const double denom = std::sqrt(xc.squaredNorm() * yc.squaredNorm());
  if (!(denom > 0.0)) {
    throw NumericalError("pcc: zero variance input");
  }
  return xc.dot(yc) / denom;
}

Eigen::VectorXd tie_averaged_ranks(const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return x(a) < x(b); });
  Eigen::VectorXd ranks(n);
  int k = 0;
  while (k < n) {
    int j = k;
    while (j + 1 < n && x(order[j + 1]) == x(order[k])) ++j;
    const double avg = 0.5 * (k + j) + 1.0;  // positions are 1-based
    for (int p = k; p <= j; ++p) ranks(order[p]) = avg;
    k = j + 1;
  }
  return ranks;
}

double scc(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ValidationError("scc: vectors must have equal length >= 2");
  }
  return pcc(tie_averaged_ranks(x), tie_averaged_ranks(y));
}

std::vector<RecoveryRow> reward_recovery_report(const RewardStack& true_rewards,
                                                const RewardStack& learned_rewards,
                                                const DemoSet& demos) {
  if (demos.size() < 2) {
    throw ValidationError("reward_recovery_report: need at least 2 trajectories");
  }
  if (true_rewards.empty() || true_rewards.size() != learned_rewards.size() ||
      true_rewards[0].size() != learned_rewards[0].size()) {
    throw ValidationError("reward_recovery_report: reward shapes do not match");
  }
  const int T = static_cast<int>(true_rewards.size());
  const int n_agents = static_cast<int>(true_rewards[0].size());
  const int m = demos.size();
  std::vector<RecoveryRow> rows(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    Eigen::VectorXd true_ret(m), learned_ret(m);
    Eigen::VectorXd true_step(m * T), learned_step(m * T);
    for (int j = 0; j < m; ++j) {
      const auto& traj = demos.trajectories[j];
      if (traj.length() != T) {
        throw ValidationError("reward_recovery_report: trajectory length mismatch");
      }
      double rt = 0.0, rl = 0.0;
      for (int t = 0; t < T; ++t) {
        const double vt = true_rewards[t][i](traj.states(t), traj.actions(t));
        const double vl = learned_rewards[t][i](traj.states(t), traj.actions(t));
        rt += vt;
        rl += vl;
        true_step(j * T + t) = vt;
        learned_step(j * T + t) = vl;
      }
      true_ret(j) = rt;
      learned_ret(j) = rl;
    }
    rows[i].pcc_trajectory = pcc(true_ret, learned_ret);
    rows[i].scc_trajectory = scc(true_ret, learned_ret);
    rows[i].pcc_step = pcc(true_step, learned_step);
    rows[i].scc_step = scc(true_step, learned_step);
  }
  return rows;
}

std::vector<RecoveryRow> reward_recovery_report(
    const std::vector<Eigen::MatrixXd>& true_rewards,
    const std::vector<Eigen::MatrixXd>& learned_rewards, const DemoSet& demos) {
  const int T = demos.trajectories.empty() ? 1 : demos.trajectories[0].length();
  return reward_recovery_report(constant_stack(true_rewards, T),
                                constant_stack(learned_rewards, T), demos);
}

Eigen::MatrixXd cross_play(const MarkovGame& game,
                           const std::vector<AgentPolicy>& side_a,
                           const std::vector<AgentPolicy>& side_b,
                           const std::vector<std::vector<int>>& pairings) {
  const int n = game.n_agents();
  if (static_cast<int>(side_a.size()) != n || static_cast<int>(side_b.size()) != n) {
    throw ValidationError("cross_play: policy sets must cover every agent");
  }
  Eigen::MatrixXd table(pairings.size(), n);
  for (std::size_t p = 0; p < pairings.size(); ++p) {
    if (static_cast<int>(pairings[p].size()) != n) {
      throw ValidationError("cross_play: pairing must assign one side per agent");
    }
    std::vector<AgentPolicy> mix(n);
    for (int i = 0; i < n; ++i) {
      if (pairings[p][i] != 0 && pairings[p][i] != 1) {
        throw ValidationError("cross_play: pairing entries must be 0 or 1");
      }
      mix[i] = pairings[p][i] == 0 ? side_a[i] : side_b[i];
    }
    const JointPolicy joint = product_policy(game, mix);
    for (int i = 0; i < n; ++i) table(p, i) = expected_return(game, joint, i);
  }
  return table;
}

double occupancy_kl(const MarkovGame& game, const JointPolicy& p,
                    const JointPolicy& q) {
  if (p.horizon != game.horizon || q.horizon != game.horizon ||
      p.n_states != game.n_states || q.n_states != game.n_states) {
    throw ValidationError("occupancy_kl: policy dimensions do not match game");
  }
  const auto dp = state_occupancies(game, p);
  const auto dq = state_occupancies(game, q);
  const double inv_t = 1.0 / game.horizon;
  double kl = 0.0;
  for (int t = 0; t < game.horizon; ++t) {
    for (int s = 0; s < game.n_states; ++s) {
      for (int a = 0; a < game.n_joint(); ++a) {
        const double mp = inv_t * dp[t](s) * p.at(t, s)(a);
        if (mp == 0.0) continue;
        const double mq = inv_t * dq[t](s) * q.at(t, s)(a);
        if (mq <= 0.0) {
          std::ostringstream out;
          out << "occupancy_kl: support violation at t=" << t + 1 << ", s=" << s
              << ", joint_a=" << a;
          throw NumericalError(out.str());
        }
        kl += mp * std::log(mp / mq);
      }
    }
  }
  return kl;
}

std::string MetricReport::to_csv() const {
  std::ostringstream out;
  out << "metric,agent,value\n";
  for (std::size_t i = 0; i < recovery.size(); ++i) {
    out << "pcc_trajectory," << i << "," << fmt17(recovery[i].pcc_trajectory) << "\n";
    out << "scc_trajectory," << i << "," << fmt17(recovery[i].scc_trajectory) << "\n";
    out << "pcc_step," << i << "," << fmt17(recovery[i].pcc_step) << "\n";
    out << "scc_step," << i << "," << fmt17(recovery[i].scc_step) << "\n";
  }
  out << "pcc_trajectory_mean,all," << fmt17(pcc_trajectory_mean) << "\n";
  out << "scc_trajectory_mean,all," << fmt17(scc_trajectory_mean) << "\n";
  for (Eigen::Index p = 0; p < cross_returns.rows(); ++p) {
    const std::string label =
        p < static_cast<Eigen::Index>(pairing_labels.size())
            ? pairing_labels[p]
            : "pairing_" + std::to_string(p);
    for (Eigen::Index i = 0; i < cross_returns.cols(); ++i) {
      out << "return_" << label << "," << i << "," << fmt17(cross_returns(p, i))
          << "\n";
    }
  }
  out << "occupancy_kl,all," << fmt17(occupancy_kl_value) << "\n";
  return out.str();
}

}  // namespace lsbre
