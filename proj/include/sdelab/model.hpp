// Copyright 2026 The sdelab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "sdelab/expr.hpp"

namespace sdelab {

enum class ModelErrorKind { InvalidProblem, InvalidGrid, EmptyPiece };

class ModelError : public std::runtime_error {
 public:
  ModelError(ModelErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ModelErrorKind kind() const { return kind_; }

 private:
  ModelErrorKind kind_;
};

/// Scalar SDE dX = mu(X) dt + sigma(X) dW on [0, 1] with deterministic X_0.
struct SdeProblem {
  ExprAst drift;
  ExprAst diffusion;
  /// Strictly increasing candidate discontinuities of the drift.
  std::vector<double> breakpoints;
  /// Growth exponent of the drift's local Lipschitz constant.
  double ell = 1.0;
  double x0 = 0.0;

  static constexpr double horizon = 1.0;
};

/// Builds a problem from expression sources. Breakpoints are the union of
/// `declared_breakpoints` and those extracted from the drift.
///
/// Throws ParseError for bad expressions and ModelError(InvalidProblem) if
/// ell <= 0, x0 is not finite or a declared breakpoint is not finite.
SdeProblem make_problem(const std::string& drift, const std::string& diffusion,
                        const std::vector<double>& declared_breakpoints, double ell, double x0);

/// gamma = min(1/(1+ell), 1/2).
double taming_exponent(double ell);

/// floor(n t) / n.
double grid_point(double t, int n);

struct CheckGrid {
  double lo = -3.0;
  double hi = 3.0;
  int count = 2000;
  int pair_count = 2000;
  std::uint64_t seed = 1;
  /// Optional caps; exceeding one is reported as a violation.
  std::optional<double> onesided_cap;
  std::optional<double> growth_cap;
  std::optional<double> sigma_lipschitz_cap;
};

struct Violation {
  /// "B1" non-finite drift sample, "B2" sigma vanishing at a breakpoint,
  /// "B2-lip" sigma Lipschitz cap, "B3-onesided" and "B3-growth" caps.
  std::string condition;
  double x = 0.0;
  std::optional<double> y;
  double value = 0.0;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;
  double lambda_hat = 4.0;
  double gamma = 0.5;
  double onesided_c_hat = 0.0;
  double growth_c_hat = 0.0;
  double sigma_lip_hat = 0.0;
  /// max over samples of (x mu(x) + sigma(x)^2 / 2) / (1 + x^2).
  double khasminskii_c_hat = 0.0;
};

/// Sampling falsifier for the coefficient assumptions. Pairs never straddle a
/// breakpoint. Deterministic in (problem, grid).
///
/// Throws EvalError from expression evaluation, ModelError(InvalidGrid) unless
/// lo < hi and count >= 2, and ModelError(EmptyPiece) when a continuity
/// interval inside [lo, hi] receives no grid points.
ValidationReport validate(const SdeProblem& problem, const CheckGrid& grid);

}  // namespace sdelab
