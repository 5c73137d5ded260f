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

#include <stdexcept>
#include <string>
#include <vector>

#include "sdelab/expr.hpp"
#include "sdelab/model.hpp"

namespace sdelab {

enum class TransformErrorKind { SigmaVanishesAtBreakpoint, OverlappingNeighborhoods };

class TransformError : public std::runtime_error {
 public:
  TransformError(TransformErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  TransformErrorKind kind() const { return kind_; }

 private:
  TransformErrorKind kind_;
};

/// One bump of the transform, centred on a drift discontinuity.
struct TransformBump {
  double xi = 0.0;
  /// (mu(xi-) - mu(xi+)) / (2 sigma(xi)^2).
  double alpha = 0.0;
  /// Half-width of the support [xi - nu, xi + nu].
  double nu = 1.0;
};

/// Monotone change of coordinates removing the drift jumps:
///
///   G(x) = x + alpha_i phi((x - xi_i) / nu_i) (x - xi_i) |x - xi_i|
///
/// on each support and G(x) = x elsewhere, with phi(u) = (1 - u^2)^3 on
/// [-1, 1]. G' is Lipschitz, G'' jumps by 4 alpha_i at xi_i, and
/// |G' - 1| <= rho <= 1/2.
struct Transform {
  std::vector<TransformBump> bumps;
  /// Upper bound on sup |G'(x) - 1|, max_i 3 |alpha_i| nu_i.
  double rho = 0.0;
};

/// Throws TransformError(SigmaVanishesAtBreakpoint) if sigma(xi) is within
/// 1e-12 of zero at some breakpoint.
Transform build_transform(const SdeProblem& problem);

double g(const Transform& t, double x);
double g_prime(const Transform& t, double x);
/// Density of G'. One-sided at each xi_i; `Side::Exact` at a centre returns
/// the right-sided value.
double g_second(const Transform& t, double x, Side side = Side::Exact);

/// Returns x with |G(x) - y| <= 1e-12 max(1, |y|), by safeguarded Newton
/// inside a bisection bracket.
double g_inverse(const Transform& t, double y);

/// Coefficients of the SDE solved by Z = G(X).
class TransformedCoefficients {
 public:
  TransformedCoefficients(Transform transform, SdeProblem problem);

  struct Values {
    double x;          // G^{-1}(z)
    double mu_tilde;
    double sigma_tilde;
  };

  /// mu~(z) = G'(x) mu(x) + G''(x) sigma(x)^2 / 2 and sigma~(z) = G'(x) sigma(x)
  /// at x = G^{-1}(z). At x = xi_i the right-sided branch is used.
  Values at(double z) const;

  double mu_tilde(double z) const { return at(z).mu_tilde; }
  double sigma_tilde(double z) const { return at(z).sigma_tilde; }

 private:
  Transform transform_;
  SdeProblem problem_;
};

TransformedCoefficients transformed_coeffs(const Transform& transform, const SdeProblem& problem);

}  // namespace sdelab
