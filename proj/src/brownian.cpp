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

#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

namespace sdelab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85;

// Separates the bridge stream from the increment stream.
constexpr std::uint64_t kBridgeKeyMask = 0xB5AD4ECEDA1CE2A9ULL;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(product);
  hi = static_cast<std::uint32_t>(product >> 32);
}

PhiloxKey split_key(std::uint64_t k) {
  return {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t join(std::uint32_t lo, std::uint32_t hi) {
  return static_cast<std::uint64_t>(lo) | (static_cast<std::uint64_t>(hi) << 32);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter ctr, PhiloxKey key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kPhiloxM0, ctr[0], lo0, hi0);
    mulhilo(kPhiloxM1, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

double uniform_open(std::uint64_t bits) {
  // 52 bits keep (k + 1/2) 2^-52 exactly representable, so 1 is never reached.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  // Acklam's rational approximation followed by one Halley step.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
  }

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the residual uses the tail that is not cancelled.
  const double e = x < 0.0 ? normal_cdf(x) - p : (1.0 - p) - 0.5 * std::erfc(x / std::numbers::sqrt2);
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - u / (1.0 + 0.5 * x * u);
}

BrownianLattice sample(std::uint64_t master_seed, std::uint64_t path_id, int n_fine) {
  if (n_fine < 1) throw BrownianError(BrownianErrorKind::InvalidArgument, "n_fine must be >= 1");
  BrownianLattice lattice{master_seed, path_id, n_fine, Eigen::VectorXd(n_fine)};
  const PhiloxKey key = split_key(master_seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_fine));
  const auto path_lo = static_cast<std::uint32_t>(path_id);
  const auto path_hi = static_cast<std::uint32_t>(path_id >> 32);
  for (int block = 0; 2 * block < n_fine; ++block) {
    const PhiloxCounter r =
        philox4x32({static_cast<std::uint32_t>(block), 0u, path_lo, path_hi}, key);
    lattice.increments[2 * block] = scale * normal_quantile(uniform_open(join(r[0], r[1])));
    if (2 * block + 1 < n_fine)
      lattice.increments[2 * block + 1] = scale * normal_quantile(uniform_open(join(r[2], r[3])));
  }
  return lattice;
}

Eigen::VectorXd coarsen(const Eigen::Ref<const Eigen::VectorXd>& increments, int factor) {
  const auto n = static_cast<int>(increments.size());
  if (factor < 1 || n % factor != 0)
    throw BrownianError(BrownianErrorKind::FactorDoesNotDivide,
                        "factor " + std::to_string(factor) + " does not divide " + std::to_string(n));
  const int m = n / factor;
  Eigen::VectorXd coarse(m);
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = j * factor; i < (j + 1) * factor; ++i) s += increments[i];
    coarse[j] = s;
  }
  return coarse;
}

Eigen::VectorXd coarsen(const BrownianLattice& lattice, int factor) {
  return coarsen(lattice.increments, factor);
}

Eigen::VectorXd prefix_sums(const Eigen::Ref<const Eigen::VectorXd>& increments) {
  Eigen::VectorXd w(increments.size() + 1);
  w[0] = 0.0;
  for (Eigen::Index i = 0; i < increments.size(); ++i) w[i + 1] = w[i] + increments[i];
  return w;
}

double bridge_value(const BrownianLattice& lattice, double t) {
  if (!(t >= 0.0 && t <= 1.0))
    throw BrownianError(BrownianErrorKind::InvalidArgument, "t must lie in [0, 1]");
  const int n = lattice.n_fine;
  auto w_at = [&](int j) {
    double s = 0.0;
    for (int i = 0; i < j; ++i) s += lattice.increments[i];
    return s;
  };

  const double nearest = std::nearbyint(t * n);
  if (nearest / n == t) return w_at(static_cast<int>(nearest));

  int cell = std::min(static_cast<int>(std::floor(t * n)), n - 1);
  if (t < static_cast<double>(cell) / n) --cell;
  if (cell + 1 < n && t > static_cast<double>(cell + 1) / n) ++cell;
  const double a = static_cast<double>(cell) / n;
  const double b = static_cast<double>(cell + 1) / n;
  const double dt = b - a;
  const double w_a = w_at(cell);
  const double w_b = w_a + lattice.increments[cell];

  std::uint64_t t_bits;
  std::memcpy(&t_bits, &t, sizeof t_bits);
  const std::uint64_t mix = splitmix64(lattice.path_id ^ splitmix64(t_bits));
  const PhiloxCounter r = philox4x32(
      {static_cast<std::uint32_t>(cell), static_cast<std::uint32_t>(mix),
       static_cast<std::uint32_t>(lattice.path_id), static_cast<std::uint32_t>(mix >> 32)},
      split_key(lattice.master_seed ^ kBridgeKeyMask));
  const double z = normal_quantile(uniform_open(join(r[0], r[1])));

  const double mean = w_a + (t - a) / dt * (w_b - w_a);
  const double sd = std::sqrt((t - a) * (b - t) / dt);
  return mean + sd * z;
}

}  // namespace sdelab
