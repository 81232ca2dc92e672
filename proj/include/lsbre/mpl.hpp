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

#ifndef LSBRE_MPL_HPP_
#define LSBRE_MPL_HPP_

#include <vector>

#include <Eigen/Core>

#include "lsbre/game.hpp"
#include "lsbre/solver.hpp"

namespace lsbre {

// Shared state-action features for linear reward parameterizations.
// phi.row(s * n_joint + a) is the feature vector of (s, a).
struct FeatureMap {
  int n_states = 0;
  int n_joint = 0;
  int dimension = 0;
  Eigen::MatrixXd phi;  // (n_states * n_joint, dimension)

  Eigen::RowVectorXd row(int s, int a) const { return phi.row(s * n_joint + a); }
};

// Reward parameters for all agents: either one table per agent or one
// weight vector per agent against a shared FeatureMap, plus the L2 penalty
// coefficient used by the pseudolikelihood objective.
struct RewardParams {
  enum class Kind { kTabular, kLinear };

  Kind kind = Kind::kTabular;
  std::vector<Eigen::MatrixXd> tables;   // [agent] (n_states x n_joint)
  std::vector<Eigen::VectorXd> weights;  // [agent] (dimension)
  FeatureMap features;                   // used when kind == kLinear
  double rho = 1e-4;

  static RewardParams tabular_zero(int n_agents, int n_states, int n_joint,
                                   double rho = 1e-4);
  static RewardParams linear_zero(int n_agents, FeatureMap features,
                                  double rho = 1e-4);

  int n_agents() const {
    return static_cast<int>(kind == Kind::kTabular ? tables.size() : weights.size());
  }
  // Materializes r_i(s, a; omega_i) for every agent.
  std::vector<Eigen::MatrixXd> reward_tables() const;

  // Flat parameter vector (agent-major; tabular entries in s * n_joint + a
  // order) and its inverse, used by the optimizer and finite differences.
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& flat);
};

// Demonstrations compressed to per-step empirical weights over (s, a);
// weights[t] sums to 1 for each t, so objective values are per-episode
// averages regardless of the demo count.
struct PlData {
  std::vector<Eigen::MatrixXd> weights;  // [t] (n_states x n_joint)
  int m = 0;                             // demo count (0 for exact distributions)

  static PlData from_demos(const MarkovGame& game, const DemoSet& demos);
  // Exact joint-action distribution for a one-state, one-step game shape.
  static PlData from_distribution(const Eigen::VectorXd& joint_dist);
};

struct FitOptions {
  double step_size = 1.0;
  int max_iters = 500;
  double grad_tol = 1e-6;
};

struct FitReport {
  RewardParams params;
  std::vector<double> objective_trace;
  std::vector<double> grad_norm_trace;
  int iterations = 0;
  bool converged = false;
};

// (1/M) sum_m sum_t sum_i log pi_i^t(a_i | a_{-i}, s; omega) - rho * |omega|^2,
// with the conditionals induced by the omega rewards: softmax of lambda * r
// at horizon 1, the full backward solve otherwise.
double pl_objective(const MarkovGame& game, const PlData& data,
                    const RewardParams& params, const LsbreConfig& cfg);
double pl_objective(const MarkovGame& game, const DemoSet& demos,
                    const RewardParams& params, const LsbreConfig& cfg);

// Gradient of pl_objective in pack() layout. Horizon-1 games use the exact
// closed form (data term minus model-conditional term, minus 2*rho*omega);
// multi-step games use central finite differences with step 1e-6.
Eigen::VectorXd pl_gradient(const MarkovGame& game, const PlData& data,
                            const RewardParams& params, const LsbreConfig& cfg);
Eigen::VectorXd pl_gradient(const MarkovGame& game, const DemoSet& demos,
                            const RewardParams& params, const LsbreConfig& cfg);

// Gradient ascent with Armijo backtracking (factor 0.5, c = 1e-4) until the
// gradient sup-norm reaches opt.grad_tol or opt.max_iters is hit. Tabular
// parameters are gauge-centered after the fit.
FitReport fit_mpl(const MarkovGame& game, const DemoSet& demos,
                  const RewardParams& init, const LsbreConfig& cfg,
                  const FitOptions& opt);

// Canonical representative of a reward table under per-(s, a_{-i}) shifts:
// zero mean over the agent's own actions for every conditioning event.
Eigen::MatrixXd gauge_center(const Eigen::MatrixXd& table,
                             const ActionSpace& actions, int agent);

}  // namespace lsbre

#endif  // LSBRE_MPL_HPP_
