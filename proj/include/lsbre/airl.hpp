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

#ifndef LSBRE_AIRL_HPP_
#define LSBRE_AIRL_HPP_

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "lsbre/game.hpp"
#include "lsbre/mpl.hpp"
#include "lsbre/solver.hpp"

namespace lsbre {

// Structured per-agent discriminators
//   D_i(s, a, s') = exp(f_i) / (exp(f_i) + q_i(a_i|s)),
//   f_i(s, a, s') = g_i(s, a) + gamma * h_i(s') - h_i(s),
// with a reward estimator g (tabular or linear-in-features, reusing the
// reward parameterization) and a per-agent state potential h. The rho field
// of the embedded parameters is unused here.
struct DiscriminatorParams {
  RewardParams g;
  std::vector<Eigen::VectorXd> h;  // [agent] (n_states)
  double gamma = 1.0;

  static DiscriminatorParams tabular_zero(const MarkovGame& game);
  double f(int agent, int s, int a, int s_next,
           const std::vector<Eigen::MatrixXd>& g_tables) const {
    return g_tables[agent](s, a) + gamma * h[agent](s_next) - h[agent](s);
  }
};

// Per-agent Markovian sampler policies q_i[t] (n_states x |A_i|).
using SamplerPolicies = std::vector<AgentPolicy>;

// One sampled transition; the step index is kept because sampler policies
// (and hence the discriminator's q-slot) are per-(t, s).
struct Transition {
  int t = 0;
  int s = 0;
  int a = 0;       // flat joint action
  int s_next = 0;  // synthesized by one extra draw at the terminal step
};
using Batch = std::vector<Transition>;

struct TrainState {
  int iteration = 0;
  DiscriminatorParams discriminators;
  SamplerPolicies samplers;
  std::vector<std::vector<double>> disc_loss_trace;  // [agent][iteration]
  std::vector<std::vector<double>> return_trace;     // [agent][iteration]
  std::uint64_t seed = 0;
};

enum class RewardMode { kGOnly, kLogit };

struct TrainConfig {
  int iterations = 300;
  int batch_size = 0;         // 0 = full batch
  double disc_step_size = 0.5;
  int disc_updates = 10;      // ascent steps per agent per iteration
  int n_sampler_traj = 200;
  RewardMode reward_mode = RewardMode::kLogit;
  std::uint64_t seed = 0;
  int checkpoint_every = 0;   // 0 = never call the checkpoint hook
};

// D_i computed in log-space from the probability q_own = q_i(a_i|s).
double discriminator_value(const DiscriminatorParams& d, int agent, int s,
                           int a, int s_next, double q_own);
// Convenience overload reading q from the sampler policies at step t.
double discriminator_value(const DiscriminatorParams& d, const ActionSpace& actions,
                           int agent, int t, int s, int a, int s_next,
                           const SamplerPolicies& q);

// mean log D over the expert batch plus mean log(1-D) over the sampler
// batch, with the exact gradient for the agent's own parameters. w_grad is
// filled instead of g_grad for linear-in-features g.
struct DiscLoss {
  double loss = 0.0;
  Eigen::MatrixXd g_grad;  // (n_states x n_joint), tabular coordinates
  Eigen::VectorXd w_grad;  // (dimension), linear coordinates
  Eigen::VectorXd h_grad;  // (n_states)
};
DiscLoss discriminator_loss(const DiscriminatorParams& d, const ActionSpace& actions,
                            int agent, const Batch& expert_batch,
                            const Batch& sampler_batch, const SamplerPolicies& q);

// kGOnly returns g_i(s, a); kLogit returns log D - log(1-D), which equals
// f_i(s, a, s') - log q_i(a_i|s) identically.
double generator_reward(const DiscriminatorParams& d, int agent, int s, int a,
                        int s_next, double q_own, RewardMode mode);

// Replaces each sampler in ascending agent order with the exact
// entropy-regularized best response to the agent's current reward estimate
// (g, or the expected f for logit mode), holding the other samplers'
// marginals fixed; each replacement maximizes that agent's exact objective
// E[sum_t r_hat - log q_i] over Markovian policies.
SamplerPolicies update_samplers(const MarkovGame& game,
                                const DiscriminatorParams& d,
                                const TrainState& state, RewardMode mode);

// Exact value of E_q[ sum_t rhat_i(s, a, E s') - log q_i(a_i|s) ] under the
// product of the sampler policies, with rhat the per-agent reward estimate
// used by update_samplers. Used to verify agent-wise ascent.
double generator_objective(const MarkovGame& game, const DiscriminatorParams& d,
                           const SamplerPolicies& samplers, int agent,
                           RewardMode mode);

// Alternating loop: sample trajectories under the current product sampler,
// ascend each discriminator on (t, s, a, s') batches from both corpora,
// then refresh every sampler by exact best response. Deterministic given
// cfg.seed. The optional hook runs every cfg.checkpoint_every iterations.
TrainState train(const MarkovGame& game, const DemoSet& demos,
                 const TrainConfig& cfg,
                 const std::function<void(const TrainState&)>& on_checkpoint = {});

// Expert-corpus view used by train: one transition per demo step, with the
// terminal next state synthesized by a single extra transition draw.
Batch expert_transitions(const MarkovGame& game, const DemoSet& demos,
                         SplitMix64& rng);

}  // namespace lsbre

#endif  // LSBRE_AIRL_HPP_
