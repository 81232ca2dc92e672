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

#include "lsbre/game.hpp"

#include <cmath>
#include <sstream>

namespace lsbre {

namespace {

constexpr double kDistTol = 1e-12;

std::string index_str(const char* label, int value) {
  std::ostringstream out;
  out << label << "=" << value;
  return out.str();
}

}  // namespace

ActionSpace::ActionSpace(std::vector<int> counts) : counts_(std::move(counts)) {
  strides_.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] < 1) {
      throw ValidationError("action_counts: agent " + std::to_string(i) +
                            " has nonpositive action count");
    }
    strides_[i] = n_joint_;
    n_joint_ *= counts_[i];
  }
}

int ActionSpace::flatten(const std::vector<int>& profile) const {
  int flat = 0;
  for (int i = 0; i < n_agents(); ++i) flat += profile[i] * strides_[i];
  return flat;
}

std::vector<int> ActionSpace::unflatten(int flat) const {
  std::vector<int> profile(counts_.size());
  for (int i = 0; i < n_agents(); ++i) {
    profile[i] = (flat / strides_[i]) % counts_[i];
  }
  return profile;
}

int ActionSpace::others_index(int flat, int agent) const {
  int idx = 0;
  int stride = 1;
  for (int j = 0; j < n_agents(); ++j) {
    if (j == agent) continue;
    idx += agent_action(flat, j) * stride;
    stride *= counts_[j];
  }
  return idx;
}

int ActionSpace::compose(int agent, int own, int others) const {
  int flat = own * strides_[agent];
  for (int j = 0; j < n_agents(); ++j) {
    if (j == agent) continue;
    flat += (others % counts_[j]) * strides_[j];
    others /= counts_[j];
  }
  return flat;
}

MarkovGame NormalFormGame::to_markov_game() const {
  MarkovGame game;
  game.n_states = 1;
  game.actions = actions;
  game.transition = {Eigen::MatrixXd::Ones(actions.n_joint(), 1)};
  game.rewards.reserve(rewards.size());
  for (const auto& r : rewards) game.rewards.push_back(r.transpose());
  game.initial_dist = Eigen::VectorXd::Ones(1);
  game.horizon = 1;
  game.discount = 1.0;
  return game;
}

NormalFormGame normal_form_from(const MarkovGame& game) {
  if (game.n_states != 1 || game.horizon != 1) {
    throw ValidationError(
        "normal_form_from: game must have one state and horizon 1");
  }
  NormalFormGame nf;
  nf.actions = game.actions;
  nf.rewards.reserve(game.rewards.size());
  for (const auto& r : game.rewards) nf.rewards.push_back(r.row(0).transpose());
  return nf;
}

JointPolicy JointPolicy::uniform(const MarkovGame& game) {
  JointPolicy pi = zeros(game.horizon, game.n_states, game.n_joint());
  for (auto& step : pi.table) {
    for (auto& dist : step) dist.setConstant(1.0 / game.n_joint());
  }
  return pi;
}

JointPolicy JointPolicy::zeros(int horizon, int n_states, int n_joint) {
  JointPolicy pi;
  pi.horizon = horizon;
  pi.n_states = n_states;
  pi.table.assign(horizon,
                  std::vector<Eigen::VectorXd>(n_states, Eigen::VectorXd::Zero(n_joint)));
  return pi;
}

JointPolicy product_policy(const MarkovGame& game,
                           const std::vector<AgentPolicy>& agents) {
  const int n = game.n_agents();
  if (static_cast<int>(agents.size()) != n) {
    throw ValidationError("product_policy: wrong number of agent policies");
  }
  JointPolicy pi = JointPolicy::zeros(game.horizon, game.n_states, game.n_joint());
  for (int t = 0; t < game.horizon; ++t) {
    for (int s = 0; s < game.n_states; ++s) {
      for (int a = 0; a < game.n_joint(); ++a) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
          p *= agents[i][t](s, game.actions.agent_action(a, i));
        }
        pi.at(t, s)(a) = p;
      }
    }
  }
  return pi;
}

void validate_game(const MarkovGame& game) {
  if (game.n_agents() < 1) throw ValidationError("game: n_agents must be positive");
  if (game.n_states < 1) throw ValidationError("game: n_states must be positive");
  if (game.horizon < 1) throw ValidationError("game: horizon must be positive");
  if (!(game.discount > 0.0 && game.discount <= 1.0)) {
    throw ValidationError("game: discount must lie in (0, 1]");
  }
  const int S = game.n_states;
  const int A = game.n_joint();
  if (static_cast<int>(game.transition.size()) != S) {
    throw ValidationError("game: transition table must have one block per state");
  }
  for (int s = 0; s < S; ++s) {
    const auto& block = game.transition[s];
    if (block.rows() != A || block.cols() != S) {
      throw ValidationError("game: transition block has wrong shape at " +
                            index_str("s", s));
    }
    for (int a = 0; a < A; ++a) {
      if ((block.row(a).array() < 0.0).any()) {
        throw ValidationError("game: negative transition probability at " +
                              index_str("s", s) + ", " + index_str("joint_a", a));
      }
      const double total = block.row(a).sum();
      if (std::abs(total - 1.0) > kDistTol) {
        std::ostringstream out;
        out << "game: transition row s=" << s << ", joint_a=" << a
            << " sums to " << total;
        throw ValidationError(out.str());
      }
    }
  }
  if (static_cast<int>(game.rewards.size()) != game.n_agents()) {
    throw ValidationError("game: rewards must have one table per agent");
  }
  for (int i = 0; i < game.n_agents(); ++i) {
    const auto& r = game.rewards[i];
    if (r.rows() != S || r.cols() != A) {
      throw ValidationError("game: reward table has wrong shape for " +
                            index_str("agent", i));
    }
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        if (!std::isfinite(r(s, a))) {
          throw ValidationError("game: non-finite reward at " + index_str("agent", i) +
                                ", " + index_str("s", s) + ", " + index_str("joint_a", a));
        }
      }
    }
  }
  if (game.initial_dist.size() != S) {
    throw ValidationError("game: initial_dist has wrong length");
  }
  if ((game.initial_dist.array() < 0.0).any()) {
    throw ValidationError("game: negative initial_dist entry");
  }
  if (std::abs(game.initial_dist.sum() - 1.0) > kDistTol) {
    std::ostringstream out;
    out << "game: initial_dist sums to " << game.initial_dist.sum();
    throw ValidationError(out.str());
  }
}

Trajectory rollout(const MarkovGame& game, const JointPolicy& policy,
                   SplitMix64& rng) {
  if (policy.horizon != game.horizon || policy.n_states != game.n_states) {
    throw ValidationError("rollout: policy dimensions do not match game");
  }
  const int T = game.horizon;
  Trajectory traj;
  traj.states.resize(T);
  traj.actions.resize(T);
  int s = rng.categorical(game.initial_dist);
  for (int t = 0; t < T; ++t) {
    traj.states(t) = s;
    const int a = rng.categorical(policy.at(t, s));
    traj.actions(t) = a;
    if (t + 1 < T) s = rng.categorical(game.transition[s].row(a));
  }
  return traj;
}

Trajectory rollout(const MarkovGame& game, const JointPolicy& policy,
                   std::uint64_t seed) {
  SplitMix64 rng(seed);
  return rollout(game, policy, rng);
}

DemoSet sample_demos(const MarkovGame& game, const JointPolicy& policy, int m,
                     std::uint64_t seed, std::string fingerprint) {
  if (m < 1) throw ValidationError("sample_demos: m must be positive");
  DemoSet demos;
  demos.seed = seed;
  demos.fingerprint = std::move(fingerprint);
  demos.trajectories.reserve(m);
  SplitMix64 rng(seed);
  for (int j = 0; j < m; ++j) demos.trajectories.push_back(rollout(game, policy, rng));
  return demos;
}

std::vector<Eigen::VectorXd> state_occupancies(const MarkovGame& game,
                                               const JointPolicy& policy) {
  std::vector<Eigen::VectorXd> d(game.horizon);
  d[0] = game.initial_dist;
  for (int t = 0; t + 1 < game.horizon; ++t) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(game.n_states);
    for (int s = 0; s < game.n_states; ++s) {
      if (d[t](s) == 0.0) continue;
      // P(s'|s) under the policy = sum_a pi(a|s) P(s'|s,a).
      next += d[t](s) * (game.transition[s].transpose() * policy.at(t, s));
    }
    d[t + 1] = next;
  }
  return d;
}

double expected_return(const MarkovGame& game, const JointPolicy& policy,
                       int agent) {
  if (agent < 0 || agent >= game.n_agents()) {
    throw ValidationError("expected_return: agent index out of range");
  }
  const auto d = state_occupancies(game, policy);
  double total = 0.0;
  double weight = 1.0;
  for (int t = 0; t < game.horizon; ++t) {
    double step = 0.0;
    for (int s = 0; s < game.n_states; ++s) {
      if (d[t](s) == 0.0) continue;
      step += d[t](s) * game.rewards[agent].row(s).dot(policy.at(t, s));
    }
    total += weight * step;
    weight *= game.discount;
  }
  return total;
}

Marginals marginal_policy(const JointPolicy& policy, const ActionSpace& actions,
                          int agent) {
  if (agent < 0 || agent >= actions.n_agents()) {
    throw ValidationError("marginal_policy: agent index out of range");
  }
  const int T = policy.horizon;
  const int S = policy.n_states;
  Marginals m;
  m.own.assign(T, Eigen::MatrixXd::Zero(S, actions.count(agent)));
  m.others.assign(T, Eigen::MatrixXd::Zero(S, actions.n_others(agent)));
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      const auto& joint = policy.at(t, s);
      for (int a = 0; a < actions.n_joint(); ++a) {
        m.own[t](s, actions.agent_action(a, agent)) += joint(a);
        m.others[t](s, actions.others_index(a, agent)) += joint(a);
      }
    }
  }
  return m;
}

ConditionalPolicy conditional_from_joint(const JointPolicy& policy,
                                         const ActionSpace& actions, int agent) {
  const Marginals m = marginal_policy(policy, actions, agent);
  const int T = policy.horizon;
  const int S = policy.n_states;
  ConditionalPolicy cond(T, std::vector<Eigen::MatrixXd>(S));
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      Eigen::MatrixXd c(actions.n_others(agent), actions.count(agent));
      for (int o = 0; o < actions.n_others(agent); ++o) {
        const double marg = m.others[t](s, o);
        if (marg <= 0.0) {
          std::ostringstream out;
          out << "conditional_from_joint: zero-probability conditioning event"
              << " agent=" << agent << ", t=" << t + 1 << ", s=" << s
              << ", others=" << o;
          throw UndefinedConditionalError(out.str());
        }
        for (int own = 0; own < actions.count(agent); ++own) {
          c(o, own) = policy.at(t, s)(actions.compose(agent, own, o)) / marg;
        }
      }
      cond[t][s] = std::move(c);
    }
  }
  return cond;
}

RewardStack constant_stack(const std::vector<Eigen::MatrixXd>& tables,
                           int horizon) {
  return RewardStack(horizon, tables);
}

RewardStack shape_rewards(const MarkovGame& game, const Eigen::VectorXd& phi,
                          double gamma) {
  if (phi.size() != game.n_states) {
    throw ValidationError("shape_rewards: potential has wrong length");
  }
  RewardStack stack(game.horizon, game.rewards);
  for (int t = 0; t < game.horizon; ++t) {
    const bool last = (t + 1 == game.horizon);
    for (auto& table : stack[t]) {
      for (int s = 0; s < game.n_states; ++s) {
        for (int a = 0; a < game.n_joint(); ++a) {
          const double bonus = last ? 0.0 : gamma * game.transition[s].row(a).dot(phi);
          table(s, a) += bonus - phi(s);
        }
      }
    }
  }
  return stack;
}

MarkovGame random_game(const RandomGameSpec& spec, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::vector<int> counts = spec.action_counts;
  if (counts.empty()) counts.assign(spec.n_agents, 2);
  MarkovGame game;
  game.n_states = spec.n_states;
  game.actions = ActionSpace(counts);
  game.horizon = spec.horizon;
  game.discount = spec.discount;
  const int S = spec.n_states;
  const int A = game.n_joint();
  auto simplex_draw = [&](int n) {
    // Dirichlet(1,..,1) via normalized exponentials.
    Eigen::RowVectorXd row(n);
    for (int k = 0; k < n; ++k) {
      row(k) = -std::log(1.0 - rng.next_double());
    }
    return Eigen::RowVectorXd(row / row.sum());
  };
  game.transition.assign(S, Eigen::MatrixXd(A, S));
  for (int s = 0; s < S; ++s) {
    for (int a = 0; a < A; ++a) game.transition[s].row(a) = simplex_draw(S);
  }
  game.rewards.assign(spec.n_agents, Eigen::MatrixXd(S, A));
  const double span = spec.reward_hi - spec.reward_lo;
  for (auto& table : game.rewards) {
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < A; ++a) {
        table(s, a) = spec.reward_lo + span * rng.next_double();
      }
    }
  }
  game.initial_dist = simplex_draw(S).transpose();
  return game;
}

}  // namespace lsbre
