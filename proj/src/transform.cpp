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

#include "sdelab/transform.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace sdelab {

namespace {

constexpr double kSigmaZeroTolerance = 1e-12;
constexpr double kAlphaEpsilon = 1e-12;

// phi(u) = (1 - u^2)^3 and its first two derivatives, for |u| <= 1.
struct Bump {
  double phi, dphi, ddphi;
};

Bump bump_at(double u) {
  const double w = 1.0 - u * u;
  return {w * w * w, -6.0 * u * w * w, w * (30.0 * u * u - 6.0)};
}

bool in_support(const TransformBump& b, double x) { return std::abs(x - b.xi) < b.nu; }

}  // namespace

Transform build_transform(const SdeProblem& problem) {
  Transform t;
  const auto& xs = problem.breakpoints;
  t.bumps.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double xi = xs[i];
    const double sigma = evaluate(problem.diffusion, xi, Side::Exact);
    if (!(std::abs(sigma) > kSigmaZeroTolerance))
      throw TransformError(TransformErrorKind::SigmaVanishesAtBreakpoint,
                           "sigma vanishes at breakpoint " + std::to_string(xi));
    const double mu_left = evaluate(problem.drift, xi, Side::Left);
    const double mu_right = evaluate(problem.drift, xi, Side::Right);
    const double alpha = (mu_left - mu_right) / (2.0 * sigma * sigma);

    double nu = std::min(1.0, 1.0 / (6.0 * std::abs(alpha) + kAlphaEpsilon));
    if (i > 0) nu = std::min(nu, 0.5 * (xi - xs[i - 1]));
    if (i + 1 < xs.size()) nu = std::min(nu, 0.5 * (xs[i + 1] - xi));
    t.bumps.push_back({xi, alpha, nu});
    t.rho = std::max(t.rho, 3.0 * std::abs(alpha) * nu);
  }
  for (std::size_t i = 1; i < t.bumps.size(); ++i) {
    const auto& a = t.bumps[i - 1];
    const auto& b = t.bumps[i];
    const double slack = 1e-12 * std::max({1.0, std::abs(a.xi), std::abs(b.xi)});
    if (a.xi + a.nu > b.xi - b.nu + slack)
      throw TransformError(TransformErrorKind::OverlappingNeighborhoods,
                           "bump supports overlap near " + std::to_string(b.xi));
  }
  return t;
}

double g(const Transform& t, double x) {
  double y = x;
  for (const auto& b : t.bumps) {
    if (!in_support(b, x)) continue;
    const double d = x - b.xi;
    y += b.alpha * bump_at(d / b.nu).phi * d * std::abs(d);
  }
  return y;
}

double g_prime(const Transform& t, double x) {
  double y = 1.0;
  for (const auto& b : t.bumps) {
    if (!in_support(b, x)) continue;
    const double d = x - b.xi;
    const double ad = std::abs(d);
    const Bump f = bump_at(d / b.nu);
    y += b.alpha * (f.dphi / b.nu * d * ad + 2.0 * f.phi * ad);
  }
  return y;
}

double g_second(const Transform& t, double x, Side side) {
  double y = 0.0;
  for (const auto& b : t.bumps) {
    if (!in_support(b, x)) continue;
    const double d = x - b.xi;
    const double ad = std::abs(d);
    const double sgn = d > 0.0 ? 1.0 : d < 0.0 ? -1.0 : (side == Side::Left ? -1.0 : 1.0);
    const Bump f = bump_at(d / b.nu);
    y += b.alpha * (f.ddphi / (b.nu * b.nu) * d * ad + 4.0 * f.dphi / b.nu * ad + 2.0 * f.phi * sgn);
  }
  return y;
}

double g_inverse(const Transform& t, double y) {
  if (std::none_of(t.bumps.begin(), t.bumps.end(),
                   [y](const TransformBump& b) { return in_support(b, y); }))
    return y;  // each support is mapped onto itself, so G^{-1} = id off them

  double spread = 0.0;
  for (const auto& b : t.bumps) spread += 2.0 * std::abs(b.alpha) * b.nu * b.nu;
  double lo = y - spread;
  double hi = y + spread;
  const double tol = 1e-12 * std::max(1.0, std::abs(y));

  double x = y;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = g(t, x) - y;
    if (std::abs(f) <= tol) return x;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    double next = x - f / g_prime(t, x);
    if (!(lo < next && next < hi)) next = 0.5 * (lo + hi);
    if (next == x || hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::abs(x)) break;
    x = next;
  }
  return x;
}

TransformedCoefficients::TransformedCoefficients(Transform transform, SdeProblem problem)
    : transform_(std::move(transform)), problem_(std::move(problem)) {}

TransformedCoefficients::Values TransformedCoefficients::at(double z) const {
  const double x = g_inverse(transform_, z);
  bool at_centre = false;
  for (const auto& b : transform_.bumps) at_centre = at_centre || x == b.xi;
  const Side side = at_centre ? Side::Right : Side::Exact;
  const double mu = evaluate(problem_.drift, x, side);
  const double sigma = evaluate(problem_.diffusion, x, side);
  const double gp = g_prime(transform_, x);
  const double gpp = g_second(transform_, x, Side::Right);
  return {x, gp * mu + 0.5 * gpp * sigma * sigma, gp * sigma};
}

TransformedCoefficients transformed_coeffs(const Transform& transform, const SdeProblem& problem) {
  return TransformedCoefficients(transform, problem);
}

}  // namespace sdelab
