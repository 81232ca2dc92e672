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

#ifndef LSBRE_NUMERIC_HPP_
#define LSBRE_NUMERIC_HPP_

#include <cmath>
#include <limits>

#include <Eigen/Core>

namespace lsbre {

// log(sum_k exp(x_k)) with max subtraction.
template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((x.array() - m).exp().sum());
}

// softmax(x)_k = exp(x_k) / sum_j exp(x_j), computed with max subtraction.
template <typename Derived>
Eigen::Vector<typename Derived::Scalar, Eigen::Dynamic> softmax(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = x.maxCoeff();
  Eigen::Vector<Scalar, Eigen::Dynamic> p = (x.array() - m).exp();
  p /= p.sum();
  return p;
}

// Shannon entropy -sum_k p_k log p_k of a probability vector, with the
// 0 * log 0 = 0 convention.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& p) {
  using Scalar = typename Derived::Scalar;
  Scalar h = 0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const Scalar pk = p(k);
    if (pk > 0) h -= pk * std::log(pk);
  }
  return h;
}

// Numerically stable logistic sigmoid.
inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) = -log(1 + exp(-x)), stable for large |x|.
inline double log_sigmoid(double x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace lsbre

#endif  // LSBRE_NUMERIC_HPP_
