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

#include "sdelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace sdelab {

SdeProblem make_problem(const std::string& drift, const std::string& diffusion,
                        const std::vector<double>& declared_breakpoints, double ell, double x0) {
  if (!(ell > 0.0) || !std::isfinite(ell))
    throw ModelError(ModelErrorKind::InvalidProblem, "ell must be a positive finite number");
  if (!std::isfinite(x0)) throw ModelError(ModelErrorKind::InvalidProblem, "x0 must be finite");

  SdeProblem p{parse(drift), parse(diffusion), {}, ell, x0};
  p.breakpoints = extract_breakpoints(p.drift);
  for (double b : declared_breakpoints) {
    if (!std::isfinite(b))
      throw ModelError(ModelErrorKind::InvalidProblem, "breakpoints must be finite");
    p.breakpoints.push_back(b);
  }
  std::sort(p.breakpoints.begin(), p.breakpoints.end());
  p.breakpoints.erase(std::unique(p.breakpoints.begin(), p.breakpoints.end()), p.breakpoints.end());
  return p;
}

double taming_exponent(double ell) { return std::min(1.0 / (1.0 + ell), 0.5); }

double grid_point(double t, int n) {
  // n * t can round across an integer; correct k so that k / n <= t < (k + 1) / n
  // holds for the rounded quotients, which makes the map idempotent.
  double k = std::floor(n * t);
  if (k / n > t) k -= 1.0;
  if ((k + 1.0) / n <= t) k += 1.0;
  return k / n;
}

namespace {

constexpr double kSigmaZeroTolerance = 1e-12;

struct Sample {
  double x;
  double mu;
  double sigma;
  std::size_t piece;
};

struct PairMax {
  double value = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  double y = 0.0;

  void offer(double v, double a, double b) {
    if (v > value) value = v, x = a, y = b;
  }
};

}  // namespace

ValidationReport validate(const SdeProblem& problem, const CheckGrid& grid) {
  if (!(grid.lo < grid.hi) || grid.count < 2 || grid.pair_count < 0)
    throw ModelError(ModelErrorKind::InvalidGrid, "check grid needs lo < hi and count >= 2");

  ValidationReport report;
  report.gamma = taming_exponent(problem.ell);

  for (double xi : problem.breakpoints) {
    const double s = evaluate(problem.diffusion, xi, Side::Exact);
    if (!(std::abs(s) > kSigmaZeroTolerance)) report.violations.push_back({"B2", xi, std::nullopt, s});
  }

  // Piece boundaries inside the sampled range.
  std::vector<double> cuts{grid.lo};
  for (double xi : problem.breakpoints)
    if (grid.lo < xi && xi < grid.hi) cuts.push_back(xi);
  cuts.push_back(grid.hi);
  const std::size_t piece_count = cuts.size() - 1;
  auto piece_of = [&](double x) {
    return static_cast<std::size_t>(std::upper_bound(cuts.begin() + 1, cuts.end() - 1, x) -
                                    (cuts.begin() + 1));
  };
  auto on_breakpoint = [&](double x) {
    return std::binary_search(problem.breakpoints.begin(), problem.breakpoints.end(), x);
  };

  auto sample = [&](double x) {
    const double mu = evaluate(problem.drift, x, Side::Exact);
    const double sigma = evaluate(problem.diffusion, x, Side::Exact);
    return Sample{x, mu, sigma, piece_of(x)};
  };

  std::vector<Sample> samples;
  samples.reserve(static_cast<std::size_t>(grid.count));
  std::vector<int> per_piece(piece_count, 0);
  const double step = (grid.hi - grid.lo) / (grid.count - 1);
  for (int i = 0; i < grid.count; ++i) {
    const double x = i + 1 == grid.count ? grid.hi : grid.lo + i * step;
    if (on_breakpoint(x)) continue;
    samples.push_back(sample(x));
    ++per_piece[samples.back().piece];
  }
  for (std::size_t k = 0; k < piece_count; ++k) {
    if (per_piece[k] == 0)
      throw ModelError(ModelErrorKind::EmptyPiece,
                       "continuity piece (" + std::to_string(cuts[k]) + ", " +
                           std::to_string(cuts[k + 1]) + ") has no sample points");
  }

  double lambda = 4.0;
  double khasminskii = -std::numeric_limits<double>::infinity();
  for (const Sample& s : samples) {
    if (!std::isfinite(s.mu)) report.violations.push_back({"B1", s.x, std::nullopt, s.mu});
    const double ax = std::abs(s.x);
    if (ax <= 1.0) lambda = std::max(lambda, 1.0 + std::abs(s.mu) + std::abs(s.sigma));
    if (ax >= 1.0) {
      lambda = std::max(lambda, s.sigma * s.sigma / (s.x * s.x));
      const double drift_ratio = s.x * s.mu / (s.x * s.x);
      if (drift_ratio > 0.0) lambda = std::max(lambda, drift_ratio * drift_ratio);
    }
    khasminskii = std::max(khasminskii, (s.x * s.mu + 0.5 * s.sigma * s.sigma) / (1.0 + s.x * s.x));
  }
  report.lambda_hat = lambda;
  report.khasminskii_c_hat = khasminskii;

  PairMax onesided, growth, sigma_lip;
  auto offer_pair = [&](const Sample& a, const Sample& b) {
    const double dx = a.x - b.x;
    if (dx == 0.0) return;
    const double dsigma = std::abs(a.sigma - b.sigma) / std::abs(dx);
    sigma_lip.offer(dsigma, a.x, b.x);
    if (a.piece != b.piece) return;
    const double dmu = a.mu - b.mu;
    onesided.offer(dx * dmu / (dx * dx), a.x, b.x);
    const double weight = 1.0 + std::pow(std::abs(a.x), problem.ell) + std::pow(std::abs(b.x), problem.ell);
    growth.offer(std::abs(dmu) / (weight * std::abs(dx)), a.x, b.x);
  };

  for (std::size_t i = 1; i < samples.size(); ++i) offer_pair(samples[i - 1], samples[i]);

  std::mt19937_64 rng(grid.seed);
  std::vector<double> lengths(piece_count);
  for (std::size_t k = 0; k < piece_count; ++k) lengths[k] = cuts[k + 1] - cuts[k];
  std::discrete_distribution<std::size_t> pick_piece(lengths.begin(), lengths.end());
  for (int i = 0; i < grid.pair_count; ++i) {
    const std::size_t k = pick_piece(rng);
    std::uniform_real_distribution<double> u(cuts[k], cuts[k + 1]);
    const double a = u(rng);
    const double b = u(rng);
    if (a == cuts[k] || b == cuts[k] || on_breakpoint(a) || on_breakpoint(b)) continue;
    offer_pair(sample(a), sample(b));
  }

  report.onesided_c_hat = onesided.value;
  report.growth_c_hat = growth.value;
  report.sigma_lip_hat = sigma_lip.value;

  if (grid.onesided_cap && onesided.value > *grid.onesided_cap)
    report.violations.push_back({"B3-onesided", onesided.x, onesided.y, onesided.value});
  if (grid.growth_cap && growth.value > *grid.growth_cap)
    report.violations.push_back({"B3-growth", growth.x, growth.y, growth.value});
  if (grid.sigma_lipschitz_cap && sigma_lip.value > *grid.sigma_lipschitz_cap)
    report.violations.push_back({"B2-lip", sigma_lip.x, sigma_lip.y, sigma_lip.value});

  report.ok = report.violations.empty();
  return report;
}

}  // namespace sdelab
