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

#ifndef LSBRE_GAME_HPP_
#define LSBRE_GAME_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lsbre/errors.hpp"
#include "lsbre/rng.hpp"

namespace lsbre {

// Mixed-radix indexing of joint actions. Agent 0 varies fastest:
//   flat(a) = sum_i a_i * stride_i,  stride_0 = 1,  stride_{i+1} = stride_i * |A_i|.
// The reduced index over the other agents' actions uses the same rule over
// agents j != i in ascending order (the lowest-indexed other agent fastest).
class ActionSpace {
 public:
  ActionSpace() = default;
  explicit ActionSpace(std::vector<int> counts);

  int n_agents() const { return static_cast<int>(counts_.size()); }
  int count(int agent) const { return counts_[agent]; }
  const std::vector<int>& counts() const { return counts_; }
  int n_joint() const { return n_joint_; }
  int n_others(int agent) const { return n_joint_ / counts_[agent]; }

  int flatten(const std::vector<int>& profile) const;
  std::vector<int> unflatten(int flat) const;

  // a_i component of a flat joint index.
  int agent_action(int flat, int agent) const {
    return (flat / strides_[agent]) % counts_[agent];
  }
  // Flattened a_{-i} component of a flat joint index.
  int others_index(int flat, int agent) const;
  // Inverse of (agent_action, others_index): rebuilds the flat joint index.
  int compose(int agent, int own, int others) const;

 private:
  std::vector<int> counts_;
  std::vector<int> strides_;
  int n_joint_ = 1;
};

// Finite Markov game: N agents, |S| states, joint-action transition and
// per-agent reward tables, initial state distribution, horizon T, discount.
// transition[s] is (n_joint x n_states): row a gives P(.|s,a).
// rewards[i] is (n_states x n_joint): entry (s,a) gives r_i(s,a).
struct MarkovGame {
  int n_states = 0;
  ActionSpace actions;
  std::vector<Eigen::MatrixXd> transition;
  std::vector<Eigen::MatrixXd> rewards;
  Eigen::VectorXd initial_dist;
  int horizon = 1;
  double discount = 1.0;

  int n_agents() const { return actions.n_agents(); }
  int n_joint() const { return actions.n_joint(); }
};

// Stateless single-shot game; convertible to a one-state horizon-1
// MarkovGame without loss.
struct NormalFormGame {
  ActionSpace actions;
  std::vector<Eigen::VectorXd> rewards;  // rewards[i](a) over joint actions

  int n_agents() const { return actions.n_agents(); }
  MarkovGame to_markov_game() const;
};

// Recovers the normal form from a one-state horizon-1 MarkovGame.
NormalFormGame normal_form_from(const MarkovGame& game);

// Time-indexed joint policy: table[t][s] is a distribution over joint
// actions. Steps are 0-based internally (step t+1 of the 1..T convention).
struct JointPolicy {
  int horizon = 0;
  int n_states = 0;
  std::vector<std::vector<Eigen::VectorXd>> table;

  const Eigen::VectorXd& at(int t, int s) const { return table[t][s]; }
  Eigen::VectorXd& at(int t, int s) { return table[t][s]; }

  static JointPolicy uniform(const MarkovGame& game);
  static JointPolicy zeros(int horizon, int n_states, int n_joint);
};

// Per-agent Markovian policy: one (n_states x |A_i|) row-stochastic matrix
// per step.
using AgentPolicy = std::vector<Eigen::MatrixXd>;

// Builds the product joint policy of per-agent Markovian policies.
JointPolicy product_policy(const MarkovGame& game,
                           const std::vector<AgentPolicy>& agents);

// Conditional policy of one agent: table[t][s] is (n_others x |A_i|); row
// a_{-i} is the distribution over the agent's own actions.
using ConditionalPolicy = std::vector<std::vector<Eigen::MatrixXd>>;

// Conditionals for all agents.
struct ConditionalPolicySet {
  int horizon = 0;
  int n_states = 0;
  std::vector<ConditionalPolicy> agents;

  const Eigen::MatrixXd& at(int agent, int t, int s) const {
    return agents[agent][t][s];
  }
};

// One played episode: states(t) and flat joint actions(t) for t = 0..T-1.
struct Trajectory {
  Eigen::VectorXi states;
  Eigen::VectorXi actions;

  int length() const { return static_cast<int>(states.size()); }
};

// A set of demonstrations plus the metadata needed to check them against
// a game file later.
struct DemoSet {
  std::uint64_t seed = 0;
  std::string fingerprint;
  std::vector<Trajectory> trajectories;

  int size() const { return static_cast<int>(trajectories.size()); }
};

// Throws ValidationError naming the first violated invariant.
void validate_game(const MarkovGame& game);

// Samples one episode: s^1 ~ eta, then a^t ~ pi^t(.|s^t), s^{t+1} ~ P(.|s^t,a^t).
// Exactly one state draw and one action draw per step, in that order.
Trajectory rollout(const MarkovGame& game, const JointPolicy& policy,
                   SplitMix64& rng);
Trajectory rollout(const MarkovGame& game, const JointPolicy& policy,
                   std::uint64_t seed);

// Samples m episodes from a fresh stream seeded with `seed`.
DemoSet sample_demos(const MarkovGame& game, const JointPolicy& policy, int m,
                     std::uint64_t seed, std::string fingerprint = "");

// Exact per-step state distributions d^t under the policy, t = 0..T-1.
std::vector<Eigen::VectorXd> state_occupancies(const MarkovGame& game,
                                               const JointPolicy& policy);

// Exact E[sum_t gamma^{t-1} r_i(s^t, a^t)] by forward propagation.
double expected_return(const MarkovGame& game, const JointPolicy& policy,
                       int agent);

// Exact marginals of a joint policy for one agent: own[t] is
// (n_states x |A_i|), others[t] is (n_states x n_others_i).
struct Marginals {
  std::vector<Eigen::MatrixXd> own;
  std::vector<Eigen::MatrixXd> others;
};
Marginals marginal_policy(const JointPolicy& policy, const ActionSpace& actions,
                          int agent);

// pi_i(a_i | a_{-i}, s) = pi(a | s) / pi_{-i}(a_{-i} | s). Throws
// UndefinedConditionalError when a conditioning event has zero marginal.
ConditionalPolicy conditional_from_joint(const JointPolicy& policy,
                                         const ActionSpace& actions, int agent);

// Per-step reward tables: stack[t][agent] is (n_states x n_joint).
using RewardStack = std::vector<std::vector<Eigen::MatrixXd>>;

// Broadcasts time-independent tables to a stack of length `horizon`.
RewardStack constant_stack(const std::vector<Eigen::MatrixXd>& tables,
                           int horizon);

// Potential-based shaping r'(s,a) = r(s,a) + gamma*E_{s'~P(.|s,a)}[phi(s')] - phi(s)
// for steps t < T; the final step treats the beyond-horizon potential as 0,
// so its shaped reward is r(s,a) - phi(s).
RewardStack shape_rewards(const MarkovGame& game, const Eigen::VectorXd& phi,
                          double gamma);

// Random desk-scale game: transition rows and the initial distribution are
// uniform-simplex (Dirichlet(1,..,1)) draws, rewards iid uniform on
// [reward_lo, reward_hi].
struct RandomGameSpec {
  int n_agents = 2;
  int n_states = 2;
  std::vector<int> action_counts;  // empty means 2 actions per agent
  int horizon = 1;
  double reward_lo = -1.0;
  double reward_hi = 1.0;
  double discount = 1.0;
};
MarkovGame random_game(const RandomGameSpec& spec, std::uint64_t seed);

}  // namespace lsbre

#endif  // LSBRE_GAME_HPP_
