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

#ifndef LSBRE_ERRORS_HPP_
#define LSBRE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace lsbre {

// Malformed inputs: invalid game definitions, mismatched shapes, bad files,
// fingerprint mismatches. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failures: non-convergence, non-finite values, degenerate
// distributions. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Power iteration failed to reach the requested tolerance. Carries the last
// sup-norm residual so callers can decide whether the result is usable.
class NonConvergenceError : public NumericalError {
 public:
  NonConvergenceError(const std::string& what, double residual)
      : NumericalError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// A conditional distribution was requested for a conditioning event of
// probability zero. The library never substitutes a fallback; callers choose.
class UndefinedConditionalError : public NumericalError {
 public:
  explicit UndefinedConditionalError(const std::string& what) : NumericalError(what) {}
};

}  // namespace lsbre

#endif  // LSBRE_ERRORS_HPP_
