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

#ifndef LSBRE_RNG_HPP_
#define LSBRE_RNG_HPP_

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "lsbre/errors.hpp"

namespace lsbre {

// SplitMix64: a counter-based generator. The state is an arithmetic counter
// advanced by a fixed odd constant; each output is a bijective hash of the
// counter. 64-bit seed, bit-reproducible across platforms.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Index sample from an unnormalized nonnegative weight vector by inverse
  // CDF over running sums. Deterministic given the seed and call order.
  template <typename Derived>
  int categorical(const Eigen::MatrixBase<Derived>& weights) {
    const double total = weights.sum();
    if (!(total > 0.0)) {
      throw NumericalError("categorical: nonpositive total weight");
    }
    const double u = next_double() * total;
    double acc = 0.0;
    const int n = static_cast<int>(weights.size());
    for (int k = 0; k < n; ++k) {
      acc += weights(k);
      if (u < acc) return k;
    }
    return n - 1;
  }

 private:
  std::uint64_t state_;
};

// Derives an independent sub-stream seed from a parent seed and a textual
// tag (FNV-1a over the tag, mixed with the parent through SplitMix64).
inline std::uint64_t derive_seed(std::uint64_t parent, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  SplitMix64 mix(parent ^ h);
  return mix.next_u64();
}

}  // namespace lsbre

#endif  // LSBRE_RNG_HPP_
