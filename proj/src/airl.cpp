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

#include "lsbre/airl.hpp"

#include <cmath>
#include <string>

#include "lsbre/numeric.hpp"

namespace lsbre {

namespace {

// Opponent-action marginals of the product sampler at every (t, s):
// others[t](s, o) = prod_{j != agent} q_j^t(a_j | s) for the profile o.
std::vector<Eigen::MatrixXd> others_marginals(const MarkovGame& game,
                                              const SamplerPolicies& samplers,
                                              int agent) {
  const ActionSpace& actions = game.actions;
  const int T = game.horizon;
  const int S = game.n_states;
  const int n_oth = actions.n_others(agent);
  std::vector<Eigen::MatrixXd> others(T, Eigen::MatrixXd::Ones(S, n_oth));
  for (int t = 0; t < T; ++t) {
    for (int s = 0; s < S; ++s) {
      for (int o = 0; o < n_oth; ++o) {
        double p = 1.0;
        int rest = o;
        for (int j = 0; j < actions.n_agents(); ++j) {
          if (j == agent) continue;
          p *= samplers[j][t](s, rest % actions.count(j));
          rest /= actions.count(j);
        }
        others[t](s, o) = p;
      }
    }
  }
  return others;
}

// Per-agent reward estimate as an (s, a) table: g itself, or the expected
// f(s, a, s') over the transition kernel for logit mode.
Eigen::MatrixXd reward_estimate(const MarkovGame& game,
                                const DiscriminatorParams& d,
                                const std::vector<Eigen::MatrixXd>& g_tables,
                                int agent, RewardMode mode) {
  if (mode == RewardMode::kGOnly) return g_tables[agent];
  Eigen::MatrixXd fbar = g_tables[agent];
  for (int s = 0; s < game.n_states; ++s) {
    const double base = d.h[agent](s);
    for (int a = 0; a < game.n_joint(); ++a) {
      fbar(s, a) += d.gamma * game.transition[s].row(a).dot(d.h[agent]) - base;
    }
  }
  return fbar;
}

double q_probability(const ActionSpace& actions, const SamplerPolicies& q,
                     int agent, int t, int s, int a) {
  return q[agent][t](s, actions.agent_action(a, agent));
}

}  // namespace

DiscriminatorParams DiscriminatorParams::tabular_zero(const MarkovGame& game) {
  DiscriminatorParams d;
  d.g = RewardParams::tabular_zero(game.n_agents(), game.n_states, game.n_joint(),
                                   /*rho=*/0.0);
  d.h.assign(game.n_agents(), Eigen::VectorXd::Zero(game.n_states));
  d.gamma = game.discount;
  return d;
}

double discriminator_value(const DiscriminatorParams& d, int agent, int s,
                           int a, int s_next, double q_own) {
  if (!(q_own > 0.0)) {
    throw NumericalError("discriminator_value: sampler probability must be positive");
  }
  const auto g_tables = d.g.reward_tables();
  const double logit = d.f(agent, s, a, s_next, g_tables) - std::log(q_own);
  return sigmoid(logit);
}

double discriminator_value(const DiscriminatorParams& d, const ActionSpace& actions,
                           int agent, int t, int s, int a, int s_next,
                           const SamplerPolicies& q) {
  return discriminator_value(d, agent, s, a, s_next,
                             q_probability(actions, q, agent, t, s, a));
}

DiscLoss discriminator_loss(const DiscriminatorParams& d, const ActionSpace& actions,
                            int agent, const Batch& expert_batch,
                            const Batch& sampler_batch, const SamplerPolicies& q) {
  if (expert_batch.empty() || sampler_batch.empty()) {
    throw ValidationError("discriminator_loss: empty batch");
  }
  const auto g_tables = d.g.reward_tables();
  const int S = static_cast<int>(d.h[agent].size());
  DiscLoss out;
  out.g_grad = Eigen::MatrixXd::Zero(S, actions.n_joint());
  out.h_grad = Eigen::VectorXd::Zero(S);

  auto accumulate = [&](const Batch& batch, bool expert) {
    const double scale = 1.0 / static_cast<double>(batch.size());
    for (const Transition& x : batch) {
      const double q_own = q_probability(actions, q, agent, x.t, x.s, x.a);
      if (!(q_own > 0.0)) {
        throw NumericalError("discriminator_loss: sampler probability must be positive");
      }
      const double logit = d.f(agent, x.s, x.a, x.s_next, g_tables) - std::log(q_own);
      const double dv = sigmoid(logit);
      // d log D / d f = 1 - D on expert pairs; d log(1-D) / d f = -D on
      // sampler pairs.
      double coeff;
      if (expert) {
        out.loss += scale * log_sigmoid(logit);
        coeff = scale * (1.0 - dv);
      } else {
        out.loss += scale * log_sigmoid(-logit);
        coeff = -scale * dv;
      }
      out.g_grad(x.s, x.a) += coeff;
      out.h_grad(x.s_next) += d.gamma * coeff;
      out.h_grad(x.s) -= coeff;
    }
  };
  accumulate(expert_batch, true);
  accumulate(sampler_batch, false);

  if (d.g.kind == RewardParams::Kind::kLinear) {
    out.w_grad = Eigen::VectorXd::Zero(d.g.features.dimension);
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < actions.n_joint(); ++a) {
        if (out.g_grad(s, a) != 0.0) {
          out.w_grad += out.g_grad(s, a) * d.g.features.row(s, a).transpose();
        }
      }
    }
  }
  if (!std::isfinite(out.loss)) {
    throw NumericalError("discriminator_loss: non-finite loss");
  }
  return out;
}

double generator_reward(const DiscriminatorParams& d, int agent, int s, int a,
                        int s_next, double q_own, RewardMode mode) {
  const auto g_tables = d.g.reward_tables();
  if (mode == RewardMode::kGOnly) return g_tables[agent](s, a);
  if (!(q_own > 0.0)) {
    throw NumericalError("generator_reward: sampler probability must be positive");
  }
  return d.f(agent, s, a, s_next, g_tables) - std::log(q_own);
}

SamplerPolicies update_samplers(const MarkovGame& game,
                                const DiscriminatorParams& d,
                                const TrainState& state, RewardMode mode) {
  SamplerPolicies samplers = state.samplers;
  const auto g_tables = d.g.reward_tables();
  LsbreConfig cfg;  // entropy weight 1: the generator objective is E[rhat - log q]
  for (int i = 0; i < game.n_agents(); ++i) {
    const auto others = others_marginals(game, samplers, i);
    const Eigen::MatrixXd rhat = reward_estimate(game, d, g_tables, i, mode);
    samplers[i] = soft_markov_response(game, others, rhat, i, cfg).policy;
  }
  return samplers;
}

double generator_objective(const MarkovGame& game, const DiscriminatorParams& d,
                           const SamplerPolicies& samplers, int agent,
                           RewardMode mode) {
  const auto g_tables = d.g.reward_tables();
  const Eigen::MatrixXd rhat = reward_estimate(game, d, g_tables, agent, mode);
  const JointPolicy joint = product_policy(game, samplers);
  const auto occ = state_occupancies(game, joint);
  const ActionSpace& actions = game.actions;
  double value = 0.0;
  for (int t = 0; t < game.horizon; ++t) {
    for (int s = 0; s < game.n_states; ++s) {
      if (occ[t](s) == 0.0) continue;
      double inner = 0.0;
      for (int a = 0; a < game.n_joint(); ++a) {
        const double p = joint.at(t, s)(a);
        if (p == 0.0) continue;
        inner += p * (rhat(s, a) -
                      std::log(q_probability(actions, samplers, agent, t, s, a)));
      }
      value += occ[t](s) * inner;
    }
  }
  return value;
}

Batch expert_transitions(const MarkovGame& game, const DemoSet& demos,
                         SplitMix64& rng) {
  Batch batch;
  batch.reserve(static_cast<std::size_t>(demos.size()) * game.horizon);
  for (const auto& traj : demos.trajectories) {
    if (traj.length() != game.horizon) {
      throw ValidationError("expert_transitions: trajectory length mismatch");
    }
    for (int t = 0; t < game.horizon; ++t) {
      Transition x;
      x.t = t;
      x.s = traj.states(t);
      x.a = traj.actions(t);
      x.s_next = (t + 1 < game.horizon)
                     ? traj.states(t + 1)
                     : rng.categorical(game.transition[x.s].row(x.a));
      batch.push_back(x);
    }
  }
  return batch;
}

TrainState train(const MarkovGame& game, const DemoSet& demos,
                 const TrainConfig& cfg,
                 const std::function<void(const TrainState&)>& on_checkpoint) {
  validate_game(game);
  if (demos.size() < 1) throw ValidationError("train: empty demo set");

  SplitMix64 rng(cfg.seed);
  TrainState state;
  state.seed = cfg.seed;
  state.discriminators = DiscriminatorParams::tabular_zero(game);
  state.samplers.resize(game.n_agents());
  for (int i = 0; i < game.n_agents(); ++i) {
    state.samplers[i].assign(
        game.horizon, Eigen::MatrixXd::Constant(game.n_states, game.actions.count(i),
                                                1.0 / game.actions.count(i)));
  }
  state.disc_loss_trace.assign(game.n_agents(), {});
  state.return_trace.assign(game.n_agents(), {});

  const Batch expert = expert_transitions(game, demos, rng);

  auto minibatch = [&](const Batch& corpus) -> Batch {
    if (cfg.batch_size <= 0 || cfg.batch_size >= static_cast<int>(corpus.size())) {
      return corpus;
    }
    Batch out;
    out.reserve(cfg.batch_size);
    for (int k = 0; k < cfg.batch_size; ++k) {
      out.push_back(corpus[rng.next_u64() % corpus.size()]);
    }
    return out;
  };

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    // Sampler corpus under the current product policy.
    const JointPolicy behavior = product_policy(game, state.samplers);
    Batch sampled;
    sampled.reserve(static_cast<std::size_t>(cfg.n_sampler_traj) * game.horizon);
    for (int j = 0; j < cfg.n_sampler_traj; ++j) {
      const Trajectory traj = rollout(game, behavior, rng);
      for (int t = 0; t < game.horizon; ++t) {
        Transition x;
        x.t = t;
        x.s = traj.states(t);
        x.a = traj.actions(t);
        x.s_next = (t + 1 < game.horizon)
                       ? traj.states(t + 1)
                       : rng.categorical(game.transition[x.s].row(x.a));
        sampled.push_back(x);
      }
    }

    DiscriminatorParams& d = state.discriminators;
    for (int i = 0; i < game.n_agents(); ++i) {
      for (int k = 0; k < cfg.disc_updates; ++k) {
        const DiscLoss dl = discriminator_loss(d, game.actions, i,
                                               minibatch(expert), minibatch(sampled),
                                               state.samplers);
        if (d.g.kind == RewardParams::Kind::kTabular) {
          d.g.tables[i] += cfg.disc_step_size * dl.g_grad;
        } else {
          d.g.weights[i] += cfg.disc_step_size * dl.w_grad;
        }
        d.h[i] += cfg.disc_step_size * dl.h_grad;
      }
      const DiscLoss full =
          discriminator_loss(d, game.actions, i, expert, sampled, state.samplers);
      if (!std::isfinite(full.loss)) {
        throw NumericalError("train: non-finite discriminator loss at iteration " +
                             std::to_string(iter));
      }
      state.disc_loss_trace[i].push_back(full.loss);
    }

    state.samplers = update_samplers(game, d, state, cfg.reward_mode);
    const JointPolicy updated = product_policy(game, state.samplers);
    for (int i = 0; i < game.n_agents(); ++i) {
      state.return_trace[i].push_back(expected_return(game, updated, i));
    }
    state.iteration = iter + 1;
    if (on_checkpoint && cfg.checkpoint_every > 0 &&
        state.iteration % cfg.checkpoint_every == 0) {
      on_checkpoint(state);
    }
  }
  return state;
}

}  // namespace lsbre
