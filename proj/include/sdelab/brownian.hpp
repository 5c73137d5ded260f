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

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sdelab {

/// Philox4x32-10 counter-based generator: a pure function of (counter, key).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

/// Maps 64 random bits to the open interval (0, 1).
double uniform_open(std::uint64_t bits);

/// Standard normal quantile, accurate to a few ulp on (0, 1).
double normal_quantile(double p);

/// Standard normal distribution function.
double normal_cdf(double x);

enum class BrownianErrorKind { FactorDoesNotDivide, InvalidArgument };

class BrownianError : public std::runtime_error {
 public:
  BrownianError(BrownianErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  BrownianErrorKind kind() const { return kind_; }

 private:
  BrownianErrorKind kind_;
};

/// Brownian increments on [0, 1] at resolution 1/n_fine for one path.
struct BrownianLattice {
  std::uint64_t master_seed = 0;
  std::uint64_t path_id = 0;
  int n_fine = 0;
  /// increments[i] = W((i+1)/n_fine) - W(i/n_fine).
  Eigen::VectorXd increments;
};

/// Draws i.i.d. N(0, 1/n_fine) increments keyed by (master_seed, path_id).
BrownianLattice sample(std::uint64_t master_seed, std::uint64_t path_id, int n_fine);

/// Sums consecutive blocks of `factor` increments, left to right.
Eigen::VectorXd coarsen(const Eigen::Ref<const Eigen::VectorXd>& increments, int factor);
Eigen::VectorXd coarsen(const BrownianLattice& lattice, int factor);

/// W at fine grid indices 0..n_fine, as left-to-right prefix sums.
Eigen::VectorXd prefix_sums(const Eigen::Ref<const Eigen::VectorXd>& increments);

/// W(t). Exact prefix sum on fine grid points; inside a fine cell a Brownian
/// bridge draw from an auxiliary stream keyed by (seed, path, cell, t), so
/// repeated queries at the same t agree. Distinct points inside one cell are
/// drawn independently from the cell's bridge law.
double bridge_value(const BrownianLattice& lattice, double t);

}  // namespace sdelab
