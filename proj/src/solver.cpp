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

#include "lsbre/solver.hpp"

#include <cmath>
#include <sstream>
#include <utility>

#include "lsbre/numeric.hpp"

namespace lsbre {

namespace {

void check_lambda(const LsbreConfig& cfg) {
  if (!(cfg.lambda > 0.0)) {
    throw ValidationError("lsbre: lambda must be strictly positive");
  }
  if (!(cfg.power_iter_tol > 0.0)) {
    throw ValidationError("lsbre: power_iter_tol must be positive");
  }
}

// Per-agent continuation values at the next step:
//   cont_i(s') = H(own-action marginal of pi_next at s') + E_{a'~pi_next} Q_next_i(s',a').
// Returns one vector over s' per agent.
std::vector<Eigen::VectorXd> continuation_values(
    const MarkovGame& game, const std::vector<Eigen::VectorXd>& pi_next,
    const std::vector<Eigen::MatrixXd>& q_next) {
  const int n = game.n_agents();
  const int S = game.n_states;
  const int A = game.n_joint();
  std::vector<Eigen::VectorXd> cont(n, Eigen::VectorXd::Zero(S));
  for (int s = 0; s < S; ++s) {
    const Eigen::VectorXd& joint = pi_next[s];
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd own = Eigen::VectorXd::Zero(game.actions.count(i));
      for (int a = 0; a < A; ++a) own(game.actions.agent_action(a, i)) += joint(a);
      cont[i](s) = entropy(own) + q_next[i].row(s).dot(joint);
    }
  }
  return cont;
}

// One backward step: Q_i^t = r_i^t + P * cont_i, or just r_i^t at the final step.
std::vector<Eigen::MatrixXd> soft_q_step(
    const MarkovGame& game, const std::vector<Eigen::MatrixXd>& rewards_t,
    const std::vector<Eigen::VectorXd>* cont) {
  const int n = game.n_agents();
  std::vector<Eigen::MatrixXd> q(n);
  for (int i = 0; i < n; ++i) {
    q[i] = rewards_t[i];
    if (cont != nullptr) {
      for (int s = 0; s < game.n_states; ++s) {
        q[i].row(s) += ((*cont)[i].transpose() * game.transition[s].transpose());
      }
    }
    if (!q[i].allFinite()) {
      throw NumericalError("soft_q_backward: non-finite soft Q value at agent " +
                           std::to_string(i));
    }
  }
  return q;
}

Eigen::MatrixXd conditional_of_q(const Eigen::MatrixXd& q_row_s,
                                 const ActionSpace& actions, int agent,
                                 int s, double lambda) {
  const int n_own = actions.count(agent);
  const int n_oth = actions.n_others(agent);
  Eigen::MatrixXd cond(n_oth, n_own);
  Eigen::VectorXd logits(n_own);
  for (int o = 0; o < n_oth; ++o) {
    for (int own = 0; own < n_own; ++own) {
      logits(own) = lambda * q_row_s(s, actions.compose(agent, own, o));
    }
    cond.row(o) = softmax(logits).transpose();
  }
  return cond;
}

}  // namespace

Eigen::VectorXd normal_form_conditional(const NormalFormGame& game, int agent,
                                        const std::vector<int>& others,
                                        const LsbreConfig& cfg) {
  check_lambda(cfg);
  const ActionSpace& actions = game.actions;
  if (agent < 0 || agent >= actions.n_agents()) {
    throw ValidationError("normal_form_conditional: agent index out of range");
  }
  if (static_cast<int>(others.size()) != actions.n_agents() - 1) {
    throw ValidationError("normal_form_conditional: others must have N-1 entries");
  }
  int others_flat = 0;
  int stride = 1;
  int k = 0;
  for (int j = 0; j < actions.n_agents(); ++j) {
    if (j == agent) continue;
    if (others[k] < 0 || others[k] >= actions.count(j)) {
      throw ValidationError("normal_form_conditional: opponent action out of range");
    }
    others_flat += others[k] * stride;
    stride *= actions.count(j);
    ++k;
  }
  Eigen::VectorXd logits(actions.count(agent));
  for (int own = 0; own < actions.count(agent); ++own) {
    logits(own) = cfg.lambda * game.rewards[agent](actions.compose(agent, own, others_flat));
  }
  return softmax(logits);
}

SoftQTable soft_q_backward(const MarkovGame& game, const JointPolicy& future,
                           const LsbreConfig& cfg) {
  return soft_q_backward(game, future, cfg, constant_stack(game.rewards, game.horizon));
}

SoftQTable soft_q_backward(const MarkovGame& game, const JointPolicy& future,
                           const LsbreConfig& cfg, const RewardStack& rewards) {
  check_lambda(cfg);
  const int T = game.horizon;
  if (future.horizon != T || future.n_states != game.n_states) {
    throw ValidationError("soft_q_backward: future policy dimensions do not match game");
  }
  if (static_cast<int>(rewards.size()) != T) {
    throw ValidationError("soft_q_backward: reward stack must cover every step");
  }
  SoftQTable table;
  table.actions = game.actions;
  table.q.assign(game.n_agents(), std::vector<Eigen::MatrixXd>(T));
  std::vector<Eigen::MatrixXd> q_next;
  for (int t = T - 1; t >= 0; --t) {
    std::vector<Eigen::MatrixXd> q_t;
    if (t == T - 1) {
      q_t = soft_q_step(game, rewards[t], nullptr);
    } else {
      const auto cont = continuation_values(game, future.table[t + 1], q_next);
      q_t = soft_q_step(game, rewards[t], &cont);
    }
    for (int i = 0; i < game.n_agents(); ++i) table.q[i][t] = q_t[i];
    q_next = std::move(q_t);
  }
  return table;
}

ConditionalPolicySet lsbre_conditionals(const SoftQTable& soft_q,
                                        const LsbreConfig& cfg) {
  check_lambda(cfg);
  const ActionSpace& actions = soft_q.actions;
  const int n = soft_q.n_agents();
  const int T = soft_q.horizon();
  const int S = n > 0 && T > 0 ? static_cast<int>(soft_q.q[0][0].rows()) : 0;
  ConditionalPolicySet set;
  set.horizon = T;
  set.n_states = S;
  set.agents.assign(n, ConditionalPolicy(T, std::vector<Eigen::MatrixXd>(S)));
  for (int i = 0; i < n; ++i) {
    for (int t = 0; t < T; ++t) {
      for (int s = 0; s < S; ++s) {
        set.agents[i][t][s] =
            conditional_of_q(soft_q.q[i][t], actions, i, s, cfg.lambda);
      }
    }
  }
  return set;
}

Eigen::MatrixXd sweep_kernel(const ConditionalPolicySet& conditionals,
                             const ActionSpace& actions, int t, int s) {
  const int A = actions.n_joint();
  Eigen::MatrixXd kernel;
  for (int i = 0; i < actions.n_agents(); ++i) {
    const Eigen::MatrixXd& cond = conditionals.at(i, t, s);
    Eigen::MatrixXd step = Eigen::MatrixXd::Zero(A, A);
    for (int a = 0; a < A; ++a) {
      const int o = actions.others_index(a, i);
      for (int own = 0; own < actions.count(i); ++own) {
        step(a, actions.compose(i, own, o)) = cond(o, own);
      }
    }
    kernel = (i == 0) ? std::move(step) : Eigen::MatrixXd(kernel * step);
  }
  return kernel;
}

StationaryResult stationary_exact(const Eigen::MatrixXd& kernel,
                                  const LsbreConfig& cfg) {
  if (kernel.rows() != kernel.cols()) {
    throw ValidationError("stationary_exact: kernel must be square");
  }
  const int n = static_cast<int>(kernel.rows());
  const Eigen::MatrixXd kt = kernel.transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(n, 1.0 / n);
  Eigen::VectorXd applied = kt * pi;
  double residual = 0.0;
  for (int k = 0; k < cfg.power_iter_max; ++k) {
    applied /= applied.sum();
    Eigen::VectorXd next = kt * applied;
    residual = (next - applied).lpNorm<Eigen::Infinity>();
    if (residual <= cfg.power_iter_tol) {
      return {applied, residual, k + 1};
    }
    applied = std::move(next);
  }
  std::ostringstream out;
  out << "stationary_exact: no convergence after " << cfg.power_iter_max
      << " sweeps, residual " << residual;
  throw NonConvergenceError(out.str(), residual);
}

Eigen::VectorXd stationary_sampled(const ConditionalPolicySet& conditionals,
                                   const ActionSpace& actions, int t, int s,
                                   int n_sweeps, int burn_in, std::uint64_t seed) {
  if (!(n_sweeps > burn_in && burn_in >= 0)) {
    throw ValidationError("stationary_sampled: need n_sweeps > burn_in >= 0");
  }
  SplitMix64 rng(seed);
  ChainState state{std::vector<int>(actions.n_agents(), 0)};
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(actions.n_joint());
  for (int sweep = 0; sweep < n_sweeps; ++sweep) {
    for (int i = 0; i < actions.n_agents(); ++i) {
      const int flat = state.flatten(actions);
      const int o = actions.others_index(flat, i);
      state.coords[i] = rng.categorical(conditionals.at(i, t, s).row(o));
    }
    if (sweep >= burn_in) counts(state.flatten(actions)) += 1.0;
  }
  return counts / static_cast<double>(n_sweeps - burn_in);
}

LsbreSolution solve_lsbre(const MarkovGame& game, const LsbreConfig& cfg) {
  return solve_lsbre(game, cfg, constant_stack(game.rewards, game.horizon));
}

LsbreSolution solve_lsbre(const MarkovGame& game, const LsbreConfig& cfg,
                          const RewardStack& rewards) {
  check_lambda(cfg);
  validate_game(game);
  if (static_cast<int>(rewards.size()) != game.horizon) {
    throw ValidationError("solve_lsbre: reward stack must cover every step");
  }
  const int T = game.horizon;
  const int S = game.n_states;
  const int n = game.n_agents();

  LsbreSolution sol;
  sol.joint = JointPolicy::zeros(T, S, game.n_joint());
  sol.residuals = Eigen::MatrixXd::Zero(T, S);
  sol.soft_q.actions = game.actions;
  sol.soft_q.q.assign(n, std::vector<Eigen::MatrixXd>(T));
  sol.conditionals.horizon = T;
  sol.conditionals.n_states = S;
  sol.conditionals.agents.assign(n, ConditionalPolicy(T, std::vector<Eigen::MatrixXd>(S)));

  std::vector<Eigen::MatrixXd> q_next;
  for (int t = T - 1; t >= 0; --t) {
    std::vector<Eigen::MatrixXd> q_t;
    if (t == T - 1) {
      q_t = soft_q_step(game, rewards[t], nullptr);
    } else {
      const auto cont = continuation_values(game, sol.joint.table[t + 1], q_next);
      q_t = soft_q_step(game, rewards[t], &cont);
    }
    for (int i = 0; i < n; ++i) {
      sol.soft_q.q[i][t] = q_t[i];
      for (int s = 0; s < S; ++s) {
        sol.conditionals.agents[i][t][s] =
            conditional_of_q(q_t[i], game.actions, i, s, cfg.lambda);
      }
    }
    for (int s = 0; s < S; ++s) {
      const Eigen::MatrixXd kernel = sweep_kernel(sol.conditionals, game.actions, t, s);
      StationaryResult st = stationary_exact(kernel, cfg);
      sol.joint.at(t, s) = std::move(st.dist);
      sol.residuals(t, s) = st.residual;
    }
    q_next = std::move(q_t);
  }
  return sol;
}

SoftBestResponse soft_best_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const Eigen::MatrixXd& reward, int agent,
                                    const LsbreConfig& cfg) {
  check_lambda(cfg);
  const int T = game.horizon;
  const int S = game.n_states;
  const ActionSpace& actions = game.actions;
  if (agent < 0 || agent >= actions.n_agents()) {
    throw ValidationError("soft_best_response: agent index out of range");
  }
  if (static_cast<int>(others.size()) != T) {
    throw ValidationError("soft_best_response: opponent marginals must cover every step");
  }
  const int n_own = actions.count(agent);
  const int n_oth = actions.n_others(agent);

  SoftBestResponse out;
  out.conditional.assign(T, std::vector<Eigen::MatrixXd>(S));
  out.soft_value.assign(T, Eigen::MatrixXd::Zero(S, n_oth));
  out.value.assign(T, Eigen::VectorXd::Zero(S));

  Eigen::VectorXd w_next;  // E_{a_{-i}'} V^{t+1}(s', a_{-i}') per s'
  for (int t = T - 1; t >= 0; --t) {
    Eigen::MatrixXd q(S, actions.n_joint());
    for (int s = 0; s < S; ++s) {
      for (int a = 0; a < actions.n_joint(); ++a) {
        double v = cfg.lambda * reward(s, a);
        if (t + 1 < T) v += game.transition[s].row(a).dot(w_next);
        q(s, a) = v;
      }
    }
    Eigen::VectorXd logits(n_own);
    for (int s = 0; s < S; ++s) {
      Eigen::MatrixXd cond(n_oth, n_own);
      for (int o = 0; o < n_oth; ++o) {
        for (int own = 0; own < n_own; ++own) {
          logits(own) = q(s, actions.compose(agent, own, o));
        }
        out.soft_value[t](s, o) = logsumexp(logits);
        cond.row(o) = softmax(logits).transpose();
      }
      out.conditional[t][s] = std::move(cond);
      out.value[t](s) = others[t].row(s).dot(out.soft_value[t].row(s));
    }
    w_next = out.value[t];
  }
  return out;
}

MarkovResponse soft_markov_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const std::vector<Eigen::MatrixXd>& reward_by_t,
                                    int agent, const LsbreConfig& cfg) {
  check_lambda(cfg);
  const int T = game.horizon;
  const int S = game.n_states;
  const ActionSpace& actions = game.actions;
  if (agent < 0 || agent >= actions.n_agents()) {
    throw ValidationError("soft_markov_response: agent index out of range");
  }
  if (static_cast<int>(others.size()) != T ||
      static_cast<int>(reward_by_t.size()) != T) {
    throw ValidationError("soft_markov_response: inputs must cover every step");
  }
  const int n_own = actions.count(agent);
  const int n_oth = actions.n_others(agent);

  MarkovResponse out;
  out.policy.assign(T, Eigen::MatrixXd::Zero(S, n_own));
  out.value.assign(T, Eigen::VectorXd::Zero(S));

  Eigen::VectorXd v_next;
  for (int t = T - 1; t >= 0; --t) {
    for (int s = 0; s < S; ++s) {
      Eigen::VectorXd qbar = Eigen::VectorXd::Zero(n_own);
      for (int own = 0; own < n_own; ++own) {
        double v = 0.0;
        for (int o = 0; o < n_oth; ++o) {
          const double w = others[t](s, o);
          if (w == 0.0) continue;
          const int a = actions.compose(agent, own, o);
          double inner = cfg.lambda * reward_by_t[t](s, a);
          if (t + 1 < T) inner += game.transition[s].row(a).dot(v_next);
          v += w * inner;
        }
        qbar(own) = v;
      }
      out.value[t](s) = logsumexp(qbar);
      out.policy[t].row(s) = softmax(qbar).transpose();
    }
    v_next = out.value[t];
  }
  return out;
}

MarkovResponse soft_markov_response(const MarkovGame& game,
                                    const std::vector<Eigen::MatrixXd>& others,
                                    const Eigen::MatrixXd& reward, int agent,
                                    const LsbreConfig& cfg) {
  return soft_markov_response(
      game, others, std::vector<Eigen::MatrixXd>(game.horizon, reward), agent, cfg);
}

}  // namespace lsbre
