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

#include "sdelab/model.hpp"
#include "sdelab/schemes.hpp"
#include "sdelab/transform.hpp"

namespace sdelab {

enum class ConvergenceErrorKind { ConfigInvalid, OverflowInEstimate, ZeroErrorRow, TooFewRows };

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(ConvergenceErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ConvergenceErrorKind kind() const { return kind_; }

 private:
  ConvergenceErrorKind kind_;
};

enum class ErrorNorm { Endpoint, SupOnCoarseGrid };

struct ConvergenceConfig {
  std::vector<int> n_list;
  int n_ref = 0;
  int m_paths = 0;
  std::vector<double> p_list{2.0};
  std::uint64_t master_seed = 0;
  SchemeKind scheme = SchemeKind::TamedEuler;
  ErrorNorm error_norm = ErrorNorm::Endpoint;
  /// Worker threads; 0 uses the hardware concurrency. Results do not depend on it.
  int threads = 0;
};

/// Least-squares fit of log2(value) against log2(1/n), i.e. against the step size.
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Throws ConvergenceError(TooFewRows) for fewer than 3 rows and
/// ConvergenceError(ZeroErrorRow) if any value is not strictly positive.
RateFit fit_rate(const std::vector<int>& n, const std::vector<double>& values);

/// (mean of v^p)^(1/p) with a normal-approximation CI on the mean of v^p
/// carried through the 1/p power by the delta method (95%).
struct LpEstimate {
  double estimate = 0.0;
  double ci_halfwidth = 0.0;
};

LpEstimate lp_estimate(const std::vector<double>& values, double p);

struct ConvergenceRow {
  int n = 0;
  std::vector<LpEstimate> per_p;  // aligned with p_list
};

struct ConvergenceReport {
  std::vector<double> p_list;
  std::vector<ConvergenceRow> rows;
  /// Per p; empty when some row is exactly zero and the rate is undefined.
  std::vector<std::optional<RateFit>> fits;
  /// Paths excluded per n because the reference or the coarse path overflowed
  /// (Euler-Maruyama only; the tamed schemes throw instead).
  std::vector<int> overflow_counts;
  int reference_overflows = 0;
};

/// Coupled strong-error estimate: every path is simulated at n_ref and at each
/// n on aggregated increments of the same lattice.
ConvergenceReport estimate_strong_error(const SdeProblem& problem, const ConvergenceConfig& config,
                                        const Transform* transform = nullptr);

struct SignChangeConfig {
  std::vector<int> n_list;
  int refine = 16;
  double xi = 0.0;
  int m_paths = 0;
  std::vector<double> p_list{1.0, 2.0};
  std::uint64_t master_seed = 0;
  SchemeKind scheme = SchemeKind::TamedEuler;
  int threads = 0;
};

struct SignChangeReport {
  std::vector<double> p_list;
  std::vector<ConvergenceRow> rows;
  /// Fit against the step size, as for strong errors.
  std::vector<std::optional<RateFit>> fits;
  std::vector<int> overflow_counts;
  std::vector<std::string> warnings;

  /// Slope of log(statistic) against log(n) for p_list[k].
  std::optional<double> slope_vs_n(std::size_t k) const {
    if (!fits[k]) return std::nullopt;
    return -fits[k]->slope;
  }
};

/// Per path, the fraction of fine points t = m/(n refine), m < n refine, where
/// (X_t - xi)(X_{floor_n(t)} - xi) <= 0, aggregated as an L_p mean over paths.
SignChangeReport sign_change_statistic(const SdeProblem& problem, const SignChangeConfig& config,
                                       const Transform* transform = nullptr);

struct MomentConfig {
  std::vector<int> n_list;
  int m_paths = 0;
  double p = 2.0;
  std::uint64_t master_seed = 0;
  SchemeKind scheme = SchemeKind::TamedEuler;
  int threads = 0;
};

struct MomentRow {
  int n = 0;
  LpEstimate estimate;  // (E[max_j |X_j|^p])^(1/p)
};

struct MomentReport {
  std::vector<MomentRow> rows;
  std::vector<int> overflow_counts;
};

MomentReport moment_estimate(const SdeProblem& problem, const MomentConfig& config,
                             const Transform* transform = nullptr);

}  // namespace sdelab
