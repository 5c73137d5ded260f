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

#include "sdelab/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace sdelab {
namespace {

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32({0, 0, 0, 0}, {0, 0}),
            (PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u}));
  EXPECT_EQ(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu}),
            (PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu}));
  EXPECT_EQ(philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u}),
            (PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u}));
}

TEST(UniformOpen, NeverHitsEndpoints) {
  EXPECT_GT(uniform_open(0), 0.0);
  EXPECT_LT(uniform_open(~std::uint64_t{0}), 1.0);
  EXPECT_EQ(uniform_open(std::uint64_t{1} << 63), 0.5 + std::ldexp(1.0, -53));
  EXPECT_EQ(uniform_open(~std::uint64_t{0}), 1.0 - std::ldexp(1.0, -53));
}

TEST(NormalQuantile, ReferenceValues) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 4e-15);
  EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 4e-15);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 2e-14);
  EXPECT_EQ(normal_quantile(0.5), 0.0);
}

TEST(NormalQuantile, InvertsCdfInRelativeTailMass) {
  for (double q = 1e-12; q < 0.5; q *= 3.0) {
    EXPECT_NEAR(normal_cdf(normal_quantile(q)), q, 1e-13 * q) << q;
    EXPECT_NEAR(normal_cdf(-normal_quantile(1.0 - q)), q, 1e-13 * q + 1e-16) << q;
  }
}

TEST(Sample, Deterministic) {
  const BrownianLattice a = sample(42, 7, 1024);
  const BrownianLattice b = sample(42, 7, 1024);
  ASSERT_EQ(a.increments.size(), 1024);
  EXPECT_TRUE((a.increments.array() == b.increments.array()).all());
  EXPECT_EQ(a.master_seed, 42u);
  EXPECT_EQ(a.path_id, 7u);
  EXPECT_EQ(a.n_fine, 1024);
}

TEST(Sample, DistinctStreams) {
  const BrownianLattice a = sample(42, 7, 1024);
  EXPECT_FALSE((a.increments.array() == sample(42, 8, 1024).increments.array()).all());
  EXPECT_FALSE((a.increments.array() == sample(43, 7, 1024).increments.array()).all());
}

TEST(Sample, PooledMomentsMatchStandardNormal) {
  double sum = 0.0, sumsq = 0.0;
  std::size_t count = 0;
  for (std::uint64_t id = 0; id < 1000; ++id) {
    const BrownianLattice l = sample(99, id, 1000);
    for (Eigen::Index i = 0; i < l.increments.size(); ++i) {
      const double z = l.increments[i] * std::sqrt(1000.0);
      sum += z;
      sumsq += z * z;
      ++count;
    }
  }
  const double mean = sum / count;
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(sumsq / count - mean * mean, 1.0, 0.01);
}

TEST(Sample, RejectsNonPositiveSize) {
  EXPECT_THROW(sample(1, 1, 0), BrownianError);
}

double ks_statistic(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const double m = static_cast<double>(v.size());
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double f = normal_cdf(v[i]);
    d = std::max({d, (i + 1) / m - f, f - i / m});
  }
  return d;
}

TEST(Sample, KolmogorovSmirnovSanity) {
  const int n = 10000;
  const double critical = 1.62762 / std::sqrt(static_cast<double>(n));
  int accepted = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const BrownianLattice l = sample(seed, 3, n);
    std::vector<double> z(n);
    for (int i = 0; i < n; ++i) z[i] = l.increments[i] * std::sqrt(static_cast<double>(n));
    accepted += ks_statistic(z) < critical;
  }
  EXPECT_GE(accepted, 95);
}

TEST(Coarsen, Examples) {
  Eigen::VectorXd v(4);
  v << 0.25, -1.5, 3.0, 0.125;
  EXPECT_TRUE((coarsen(v, 1).array() == v.array()).all());
  const Eigen::VectorXd c = coarsen(v, 2);
  ASSERT_EQ(c.size(), 2);
  EXPECT_EQ(c[0], 0.25 + -1.5);
  EXPECT_EQ(c[1], 3.0 + 0.125);
  EXPECT_EQ(coarsen(v, 4)[0], ((0.25 + -1.5) + 3.0) + 0.125);
}

TEST(Coarsen, FactorMustDivide) {
  try {
    coarsen(sample(1, 1, 12), 5);
    FAIL();
  } catch (const BrownianError& e) {
    EXPECT_EQ(e.kind(), BrownianErrorKind::FactorDoesNotDivide);
  }
  EXPECT_THROW(coarsen(sample(1, 1, 12), 0), BrownianError);
}

TEST(Coarsen, SumConsistency) {
  for (std::uint64_t id = 0; id < 50; ++id) {
    const BrownianLattice l = sample(5, id, 4096);
    for (int f : {2, 8, 64, 4096}) EXPECT_LE(std::abs(coarsen(l, f).sum() - l.increments.sum()), 1e-12);
  }
}

TEST(Coarsen, PrefixSumsAgreeAtSharedGridPoints) {
  const BrownianLattice l = sample(5, 3, 4096);
  const Eigen::VectorXd fine = prefix_sums(l.increments);
  for (int f : {4, 32, 512}) {
    const Eigen::VectorXd coarse = prefix_sums(coarsen(l, f));
    for (Eigen::Index j = 0; j < coarse.size(); ++j) EXPECT_NEAR(coarse[j], fine[j * f], 1e-12);
  }
}

TEST(Coarsen, NestedEqualsDirect) {
  // Dyadic increments sum exactly, so block sums of block sums are bitwise equal.
  Eigen::VectorXd v(64);
  for (int i = 0; i < 64; ++i) v[i] = std::ldexp((i * 37 % 11) - 5.0, -(i % 7));
  EXPECT_TRUE((coarsen(coarsen(v, 4), 4).array() == coarsen(v, 16).array()).all());
}

TEST(BridgeValue, GridPointsArePrefixSums) {
  const BrownianLattice l = sample(8, 2, 64);
  const Eigen::VectorXd w = prefix_sums(l.increments);
  EXPECT_EQ(bridge_value(l, 0.0), 0.0);
  for (int j = 0; j <= 64; ++j) EXPECT_EQ(bridge_value(l, j / 64.0), w[j]);
}

TEST(BridgeValue, RepeatableInsideCells) {
  const BrownianLattice l = sample(8, 2, 64);
  for (double t : {0.001, 0.3, 0.777, 0.999}) EXPECT_EQ(bridge_value(l, t), bridge_value(l, t));
  EXPECT_NE(bridge_value(l, 0.3), bridge_value(l, 0.30001));
}

TEST(BridgeValue, ConditionalMeanAndVariance) {
  // W(1/4 * 1/n) given the cell ends: mean = W_left + (1/4) dW,
  // variance = (1/4)(3/4)/n.
  const int n = 4;
  const int draws = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const BrownianLattice l = sample(77, static_cast<std::uint64_t>(k), n);
    const double t = 1.25 / n;
    const double left = l.increments[0];
    const double mean = left + 0.25 * l.increments[1];
    const double r = bridge_value(l, t) - mean;
    sum += r;
    sumsq += r * r;
  }
  const double var = 0.25 * 0.75 / n;
  EXPECT_NEAR(sum / draws, 0.0, 3.0 * std::sqrt(var / draws));
  EXPECT_NEAR(sumsq / draws, var, 3.0 * var * std::sqrt(2.0 / draws));
}

}  // namespace
}  // namespace sdelab
