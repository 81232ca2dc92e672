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

#include "lsbre/mpl.hpp"

#include <cmath>

#include "lsbre/numeric.hpp"

namespace lsbre {

namespace {

constexpr double kFiniteDiffStep = 1e-6;
constexpr double kArmijoC = 1e-4;
constexpr double kArmijoFactor = 0.5;
constexpr int kArmijoMaxHalvings = 60;

// Conditionals of the omega-induced rewards. Horizon-1 games need no
// backward pass: Q = r, so the conditionals are direct softmaxes.
ConditionalPolicySet induced_conditionals(const MarkovGame& game,
                                          const std::vector<Eigen::MatrixXd>& tables,
                                          const LsbreConfig& cfg) {
  MarkovGame shaped = game;
  shaped.rewards = tables;
  if (game.horizon == 1) {
    JointPolicy unused = JointPolicy::uniform(shaped);
    return lsbre_conditionals(soft_q_backward(shaped, unused, cfg), cfg);
  }
  return solve_lsbre(shaped, cfg).conditionals;
}

double log_conditional_sum(const MarkovGame& game,
                           const ConditionalPolicySet& cond, const PlData& data) {
  const ActionSpace& actions = game.actions;
  double total = 0.0;
  for (int t = 0; t < game.horizon; ++t) {
    for (int s = 0; s < game.n_states; ++s) {
      for (int a = 0; a < game.n_joint(); ++a) {
        const double w = data.weights[t](s, a);
        if (w == 0.0) continue;
        double lp = 0.0;
        for (int i = 0; i < game.n_agents(); ++i) {
          lp += std::log(cond.at(i, t, s)(actions.others_index(a, i),
                                          actions.agent_action(a, i)));
        }
        total += w * lp;
      }
    }
  }
  return total;
}

}  // namespace

RewardParams RewardParams::tabular_zero(int n_agents, int n_states, int n_joint,
                                        double rho) {
  RewardParams p;
  p.kind = Kind::kTabular;
  p.tables.assign(n_agents, Eigen::MatrixXd::Zero(n_states, n_joint));
  p.rho = rho;
  return p;
}

RewardParams RewardParams::linear_zero(int n_agents, FeatureMap features,
                                       double rho) {
  RewardParams p;
  p.kind = Kind::kLinear;
  p.weights.assign(n_agents, Eigen::VectorXd::Zero(features.dimension));
  p.features = std::move(features);
  p.rho = rho;
  return p;
}

std::vector<Eigen::MatrixXd> RewardParams::reward_tables() const {
  if (kind == Kind::kTabular) return tables;
  std::vector<Eigen::MatrixXd> out;
  out.reserve(weights.size());
  for (const auto& w : weights) {
    Eigen::VectorXd flat = features.phi * w;
    Eigen::MatrixXd table(features.n_states, features.n_joint);
    for (int s = 0; s < features.n_states; ++s) {
      table.row(s) = flat.segment(s * features.n_joint, features.n_joint).transpose();
    }
    out.push_back(std::move(table));
  }
  return out;
}

Eigen::VectorXd RewardParams::pack() const {
  std::vector<double> flat;
  if (kind == Kind::kTabular) {
    for (const auto& table : tables) {
      for (int s = 0; s < table.rows(); ++s) {
        for (int a = 0; a < table.cols(); ++a) flat.push_back(table(s, a));
      }
    }
  } else {
    for (const auto& w : weights) {
      flat.insert(flat.end(), w.data(), w.data() + w.size());
    }
  }
  return Eigen::Map<Eigen::VectorXd>(flat.data(), flat.size());
}

void RewardParams::unpack(const Eigen::VectorXd& flat) {
  Eigen::Index k = 0;
  if (kind == Kind::kTabular) {
    for (auto& table : tables) {
      for (int s = 0; s < table.rows(); ++s) {
        for (int a = 0; a < table.cols(); ++a) table(s, a) = flat(k++);
      }
    }
  } else {
    for (auto& w : weights) {
      w = flat.segment(k, w.size());
      k += w.size();
    }
  }
  if (k != flat.size()) {
    throw ValidationError("RewardParams::unpack: flat vector has wrong length");
  }
}

PlData PlData::from_demos(const MarkovGame& game, const DemoSet& demos) {
  if (demos.size() < 1) throw ValidationError("pl: empty demo set");
  PlData data;
  data.m = demos.size();
  data.weights.assign(game.horizon,
                      Eigen::MatrixXd::Zero(game.n_states, game.n_joint()));
  for (const auto& traj : demos.trajectories) {
    if (traj.length() != game.horizon) {
      throw ValidationError("pl: trajectory length does not match game horizon");
    }
    for (int t = 0; t < game.horizon; ++t) {
      data.weights[t](traj.states(t), traj.actions(t)) += 1.0;
    }
  }
  for (auto& w : data.weights) w /= static_cast<double>(data.m);
  return data;
}

PlData PlData::from_distribution(const Eigen::VectorXd& joint_dist) {
  PlData data;
  data.weights.assign(1, joint_dist.transpose());
  return data;
}

double pl_objective(const MarkovGame& game, const PlData& data,
                    const RewardParams& params, const LsbreConfig& cfg) {
  if (static_cast<int>(data.weights.size()) != game.horizon) {
    throw ValidationError("pl_objective: data does not match game horizon");
  }
  const auto cond = induced_conditionals(game, params.reward_tables(), cfg);
  return log_conditional_sum(game, cond, data) - params.rho * params.pack().squaredNorm();
}

double pl_objective(const MarkovGame& game, const DemoSet& demos,
                    const RewardParams& params, const LsbreConfig& cfg) {
  return pl_objective(game, PlData::from_demos(game, demos), params, cfg);
}

Eigen::VectorXd pl_gradient(const MarkovGame& game, const PlData& data,
                            const RewardParams& params, const LsbreConfig& cfg) {
  if (game.horizon == 1) {
    const ActionSpace& actions = game.actions;
    const int S = game.n_states;
    const int A = game.n_joint();
    const auto tables = params.reward_tables();
    const auto& w = data.weights[0];
    // Per-agent tabular influence: lambda * (data term - model term).
    std::vector<Eigen::MatrixXd> influence(game.n_agents(),
                                           Eigen::MatrixXd::Zero(S, A));
    Eigen::VectorXd logits;
    for (int i = 0; i < game.n_agents(); ++i) {
      const int n_own = actions.count(i);
      logits.resize(n_own);
      for (int s = 0; s < S; ++s) {
        for (int o = 0; o < actions.n_others(i); ++o) {
          double marg = 0.0;
          for (int own = 0; own < n_own; ++own) {
            marg += w(s, actions.compose(i, own, o));
          }
          for (int own = 0; own < n_own; ++own) {
            logits(own) = cfg.lambda * tables[i](s, actions.compose(i, own, o));
          }
          const Eigen::VectorXd model = softmax(logits);
          for (int own = 0; own < n_own; ++own) {
            const int a = actions.compose(i, own, o);
            influence[i](s, a) = cfg.lambda * (w(s, a) - marg * model(own));
          }
        }
      }
    }
    Eigen::VectorXd grad;
    if (params.kind == RewardParams::Kind::kTabular) {
      grad.resize(game.n_agents() * S * A);
      Eigen::Index k = 0;
      for (int i = 0; i < game.n_agents(); ++i) {
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < A; ++a) grad(k++) = influence[i](s, a);
        }
      }
    } else {
      grad.resize(game.n_agents() * params.features.dimension);
      for (int i = 0; i < game.n_agents(); ++i) {
        Eigen::VectorXd gi = Eigen::VectorXd::Zero(params.features.dimension);
        for (int s = 0; s < S; ++s) {
          for (int a = 0; a < A; ++a) {
            if (influence[i](s, a) != 0.0) {
              gi += influence[i](s, a) * params.features.row(s, a).transpose();
            }
          }
        }
        grad.segment(i * params.features.dimension, params.features.dimension) = gi;
      }
    }
    return grad - 2.0 * params.rho * params.pack();
  }

  // Multi-step shapes: central finite differences through the backward solve.
  RewardParams probe = params;
  Eigen::VectorXd flat = params.pack();
  Eigen::VectorXd grad(flat.size());
  for (Eigen::Index k = 0; k < flat.size(); ++k) {
    const double saved = flat(k);
    flat(k) = saved + kFiniteDiffStep;
    probe.unpack(flat);
    const double hi = pl_objective(game, data, probe, cfg);
    flat(k) = saved - kFiniteDiffStep;
    probe.unpack(flat);
    const double lo = pl_objective(game, data, probe, cfg);
    flat(k) = saved;
    grad(k) = (hi - lo) / (2.0 * kFiniteDiffStep);
  }
  return grad;
}

Eigen::VectorXd pl_gradient(const MarkovGame& game, const DemoSet& demos,
                            const RewardParams& params, const LsbreConfig& cfg) {
  return pl_gradient(game, PlData::from_demos(game, demos), params, cfg);
}

Eigen::MatrixXd gauge_center(const Eigen::MatrixXd& table,
                             const ActionSpace& actions, int agent) {
  Eigen::MatrixXd out = table;
  const int n_own = actions.count(agent);
  for (int s = 0; s < table.rows(); ++s) {
    for (int o = 0; o < actions.n_others(agent); ++o) {
      double mean = 0.0;
      for (int own = 0; own < n_own; ++own) {
        mean += table(s, actions.compose(agent, own, o));
      }
      mean /= n_own;
      for (int own = 0; own < n_own; ++own) {
        out(s, actions.compose(agent, own, o)) -= mean;
      }
    }
  }
  return out;
}

FitReport fit_mpl(const MarkovGame& game, const DemoSet& demos,
                  const RewardParams& init, const LsbreConfig& cfg,
                  const FitOptions& opt) {
  const PlData data = PlData::from_demos(game, demos);
  FitReport report;
  report.params = init;
  RewardParams& params = report.params;

  Eigen::VectorXd flat = params.pack();
  double objective = pl_objective(game, data, params, cfg);
  if (!std::isfinite(objective)) {
    throw NumericalError("fit_mpl: non-finite objective at initial parameters");
  }
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    const Eigen::VectorXd grad = pl_gradient(game, data, params, cfg);
    const double grad_norm = grad.lpNorm<Eigen::Infinity>();
    report.objective_trace.push_back(objective);
    report.grad_norm_trace.push_back(grad_norm);
    if (grad_norm <= opt.grad_tol) {
      report.converged = true;
      break;
    }
    // Armijo backtracking on the ascent direction.
    const double slope = grad.squaredNorm();
    double step = opt.step_size;
    bool accepted = false;
    RewardParams trial = params;
    for (int h = 0; h < kArmijoMaxHalvings; ++h) {
      trial.unpack(flat + step * grad);
      const double value = pl_objective(game, data, trial, cfg);
      if (!std::isfinite(value)) {
        throw NumericalError("fit_mpl: non-finite objective during line search");
      }
      if (value >= objective + kArmijoC * step * slope) {
        accepted = true;
        objective = value;
        break;
      }
      step *= kArmijoFactor;
    }
    if (!accepted) break;  // numerically flat; no ascent step exists
    params = trial;
    flat = params.pack();
    ++report.iterations;
  }
  if (report.grad_norm_trace.empty() || !report.converged) {
    // Record the state the loop ended in.
    const Eigen::VectorXd grad = pl_gradient(game, data, params, cfg);
    report.objective_trace.push_back(pl_objective(game, data, params, cfg));
    report.grad_norm_trace.push_back(grad.lpNorm<Eigen::Infinity>());
    report.converged = report.grad_norm_trace.back() <= opt.grad_tol;
  }
  if (params.kind == RewardParams::Kind::kTabular) {
    for (int i = 0; i < params.n_agents(); ++i) {
      params.tables[i] = gauge_center(params.tables[i], game.actions, i);
    }
  }
  return report;
}

}  // namespace lsbre
