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

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sdelab/brownian.hpp"
#include "sdelab/model.hpp"
#include "sdelab/transform.hpp"

namespace sdelab {

enum class SchemeKind { EulerMaruyama, TamedEuler, TransformedTamedEuler };

const char* to_string(SchemeKind kind);
/// Accepts "euler_maruyama", "tamed_euler" and "transformed_tamed_euler".
SchemeKind scheme_from_string(const std::string& name);

struct PathResult {
  int n = 0;
  /// X at t = j/n, j = 0..n. Always in X coordinates.
  Eigen::VectorXd values;
  /// X at t = m/(n refine), m = 0..n refine; empty unless interpolated.
  Eigen::VectorXd fine_values;
  /// Set iff some value is not finite.
  bool overflow = false;
};

/// mu / (1 + |mu| / n).
inline double tame(double mu, int n) { return mu / (1.0 + std::abs(mu) / n); }

/// Runs one scheme on the grid j/n driven by `increments` (length n).
///
///   EulerMaruyama:         X += mu(X)/n + sigma(X) dW
///   TamedEuler:            X += tame(mu(X), n)/n + sigma(X) dW
///   TransformedTamedEuler: Z = G(X), Z += tame(mu~(Z), n)/n + sigma~(Z) dW,
///                          reported as X = G^{-1}(Z)
///
/// `transform` is required for the transformed scheme and ignored otherwise.
/// Once a value overflows the rest of the path is NaN and `overflow` is set.
PathResult simulate_path(const SdeProblem& problem, SchemeKind kind, int n,
                         const Eigen::Ref<const Eigen::VectorXd>& increments,
                         const Transform* transform = nullptr);

/// Simulates on the coarse grid with coarsen(lattice, refine) and evaluates
/// the time-continuous scheme at every fine lattice point. Requires
/// lattice.n_fine == n * refine. fine_values[m * refine] == values[m].
PathResult interpolate_on_fine_grid(const SdeProblem& problem, SchemeKind kind, int n,
                                    const BrownianLattice& lattice, int refine,
                                    const Transform* transform = nullptr);

struct TamingGrowthReport {
  double gamma = 0.5;
  std::vector<int> n_list;
  /// sup over the x grid of |tame(mu(x), n)| / (n^(1-gamma) (1 + |x|)), per n.
  std::vector<double> sup_ratio;
  /// Running max of sup_ratio over n' >= n; non-increasing in n.
  std::vector<double> envelope;
  double sup = 0.0;
  /// max / min of sup_ratio across n (1 when all are zero).
  double spread = 1.0;
};

TamingGrowthReport taming_growth_check(const SdeProblem& problem, const std::vector<int>& n_list,
                                       const Eigen::Ref<const Eigen::VectorXd>& x_grid);

}  // namespace sdelab
