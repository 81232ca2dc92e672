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

#ifndef LSBRE_SOLVER_HPP_
#define LSBRE_SOLVER_HPP_

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "lsbre/game.hpp"

namespace lsbre {

// Logistic stochastic best response equilibrium (LSBRE) of a finite Markov
// game. Each agent's one-step conditional is the softmax of lambda times its
// soft Q-values over its own actions; the joint policy at every (t, s) is the
// stationary distribution of the systematic-scan chain that resamples one
// agent at a time from those conditionals, in ascending agent order. The
// backward recursion over t is undiscounted; the game's discount enters only
// expected returns, potential-based shaping, and discriminator potentials.
struct LsbreConfig {
  double lambda = 1.0;        // rationality; > 0, uniform limit excluded
  double power_iter_tol = 1e-12;
  int power_iter_max = 100000;
};

// Per-agent soft Q tables: q[i][t] is (n_states x n_joint). At the final
// step Q equals the reward table exactly.
struct SoftQTable {
  ActionSpace actions;
  std::vector<std::vector<Eigen::MatrixXd>> q;  // [agent][t]

  const Eigen::MatrixXd& at(int agent, int t) const { return q[agent][t]; }
  int n_agents() const { return static_cast<int>(q.size()); }
  int horizon() const { return q.empty() ? 0 : static_cast<int>(q[0].size()); }
};

// Coordinates of the systematic-scan chain at a fixed (t, s): one action
// index per agent.
struct ChainState {
  std::vector<int> coords;

  int flatten(const ActionSpace& actions) const { return actions.flatten(coords); }
};

struct LsbreSolution {
  JointPolicy joint;
  ConditionalPolicySet conditionals;
  SoftQTable soft_q;
  Eigen::MatrixXd residuals;  // (horizon x n_states) power-iteration residuals
};

struct StationaryResult {
  Eigen::VectorXd dist;
  double residual = 0.0;
  int iterations = 0;
};

// softmax over a_i of lambda * r_i(a_i, a_{-i}) for fixed opponent actions
// (one entry per other agent, ascending agent order).
Eigen::VectorXd normal_form_conditional(const NormalFormGame& game, int agent,
                                        const std::vector<int>& others,
                                        const LsbreConfig& cfg);

// Backward soft-Q recursion given the joint policies played at later steps
// (slot t of `future` is read for steps t >= 1; slot 0 is unused):
//   Q[i][T](s,a) = r_i(s,a)
//   Q[i][t](s,a) = r_i(s,a)
//       + E_{s'~P(.|s,a)}[ H(pi_i^{t+1}(.|s')) + E_{a'~pi^{t+1}(.|s')} Q[i][t+1](s',a') ],
// where H is the Shannon entropy of agent i's own-action marginal at s'.
SoftQTable soft_q_backward(const MarkovGame& game, const JointPolicy& future,
                           const LsbreConfig& cfg);
// Same recursion with per-step reward tables (used by shaping checks).
SoftQTable soft_q_backward(const MarkovGame& game, const JointPolicy& future,
                           const LsbreConfig& cfg, const RewardStack& rewards);

// c[i][t][s][a_{-i}] = softmax over a_i of lambda * Q[i][t](s, a_i, a_{-i}).
ConditionalPolicySet lsbre_conditionals(const SoftQTable& soft_q,
                                        const LsbreConfig& cfg);

// One full systematic sweep at (t, s): the product of the N single-coordinate
// resampling kernels in ascending agent order, as a row-stochastic
// (n_joint x n_joint) matrix acting on row vectors.
Eigen::MatrixXd sweep_kernel(const ConditionalPolicySet& conditionals,
                             const ActionSpace& actions, int t, int s);

// Power iteration from the uniform distribution until ||pi K - pi||_inf
// is at most cfg.power_iter_tol. Throws NonConvergenceError (carrying the
// last residual) after cfg.power_iter_max sweeps.
StationaryResult stationary_exact(const Eigen::MatrixXd& kernel,
                                  const LsbreConfig& cfg);

// Runs the systematic-scan chain from the all-zeros profile and returns the
// empirical distribution of the joint states recorded after each complete
// sweep past burn_in (n_sweeps - burn_in samples).
Eigen::VectorXd stationary_sampled(const ConditionalPolicySet& conditionals,
                                   const ActionSpace& actions, int t, int s,
                                   int n_sweeps, int burn_in, std::uint64_t seed);

// Backward over t = T..1: soft Q given the already-solved later policies,
// softmax conditionals, then one exact stationary solve per state (the chain
// factorizes across states because each coordinate update at s reads only the
// other agents' coordinates at the same s).
LsbreSolution solve_lsbre(const MarkovGame& game, const LsbreConfig& cfg);
LsbreSolution solve_lsbre(const MarkovGame& game, const LsbreConfig& cfg,
                          const RewardStack& rewards);

// Entropy-regularized best response of one agent to fixed opponent marginals,
// as a conditional policy. Backward recursion:
//   Q^T(s,a) = lambda * r(s,a)
//   V^t(s,a_{-i}) = log sum_{a_i} exp Q^t(s,a)
//   Q^t(s,a) = lambda * r(s,a)
//       + E_{s'~P(.|s,a)}[ E_{a_{-i}' ~ others^{t+1}(.|s')} V^{t+1}(s',a_{-i}') ]
// with pi^t(a_i|s,a_{-i}) = exp(Q^t - V^t). Among all conditional policies,
// this is the unique minimizer of the trajectory KL divergence to the
// reward-weighted opponent-marginal path measure.
struct SoftBestResponse {
  ConditionalPolicy conditional;             // [t][s] (n_others x |A_i|)
  std::vector<Eigen::MatrixXd> soft_value;   // [t] (n_states x n_others) V
  std::vector<Eigen::VectorXd> value;        // [t] (n_states) E_{a_{-i}}[V]
};
SoftBestResponse soft_best_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const Eigen::MatrixXd& reward, int agent,
                                    const LsbreConfig& cfg);

// Entropy-regularized best response within the Markovian class: soft value
// iteration on the opponent-averaged decision process,
//   Qbar^t(s,a_i) = E_{a_{-i} ~ others^t(.|s)}[ lambda * r_t(s,a)
//                   + E_{s'~P(.|s,a)} Vbar^{t+1}(s') ],
//   Vbar^t(s) = log sum_{a_i} exp Qbar^t(s,a_i),
// returning q^t(a_i|s) = exp(Qbar - Vbar). This is the exact maximizer of
// E_q[ sum_t lambda * r_t + H(q^t(.|s^t)) ] over Markovian policies of the
// agent, opponents held fixed.
struct MarkovResponse {
  AgentPolicy policy;                    // [t] (n_states x |A_i|)
  std::vector<Eigen::VectorXd> value;    // [t] (n_states) Vbar
};
MarkovResponse soft_markov_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const std::vector<Eigen::MatrixXd>& reward_by_t,
                                    int agent, const LsbreConfig& cfg);
MarkovResponse soft_markov_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const Eigen::MatrixXd& reward, int agent,
                                    const LsbreConfig& cfg);

}  // namespace lsbre

#endif  // LSBRE_SOLVER_HPP_
