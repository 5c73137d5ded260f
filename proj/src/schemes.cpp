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

#include "sdelab/schemes.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace sdelab {

const char* to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::EulerMaruyama: return "euler_maruyama";
    case SchemeKind::TamedEuler: return "tamed_euler";
    case SchemeKind::TransformedTamedEuler: return "transformed_tamed_euler";
  }
  return "unknown";
}

SchemeKind scheme_from_string(const std::string& name) {
  for (SchemeKind k : {SchemeKind::EulerMaruyama, SchemeKind::TamedEuler,
                       SchemeKind::TransformedTamedEuler})
    if (name == to_string(k)) return k;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct StepTerms {
  double x;      // current state in X coordinates
  double drift;  // drift actually applied per unit time (tamed or not)
  double sigma;
};

// Evaluates the per-step coefficients of one scheme at a state.
class Stepper {
 public:
  Stepper(const SdeProblem& problem, SchemeKind kind, int n, const Transform* transform)
      : problem_(problem), kind_(kind), n_(n) {
    if (kind == SchemeKind::TransformedTamedEuler) {
      if (transform == nullptr)
        throw std::invalid_argument("transformed scheme requires a transform");
      transform_ = transform;
      coeffs_.emplace(*transform, problem);
    }
  }

  double initial_state() const {
    return transform_ ? g(*transform_, problem_.x0) : problem_.x0;
  }

  double to_x(double state) const { return transform_ ? g_inverse(*transform_, state) : state; }

  StepTerms terms(double state) const {
    if (coeffs_) {
      const auto v = coeffs_->at(state);
      return {v.x, checked_tame(v.mu_tilde), v.sigma_tilde};
    }
    const double mu = evaluate(problem_.drift, state, Side::Exact);
    const double sigma = evaluate(problem_.diffusion, state, Side::Exact);
    return {state, kind_ == SchemeKind::EulerMaruyama ? mu : checked_tame(mu), sigma};
  }

 private:
  double checked_tame(double mu) const {
    if (!std::isfinite(mu)) throw EvalError(EvalErrorKind::Overflow, "drift is not finite");
    const double t = tame(mu, n_);
    assert(std::abs(t) <= n_);
    return t;
  }

  const SdeProblem& problem_;
  SchemeKind kind_;
  int n_;
  const Transform* transform_ = nullptr;
  std::optional<TransformedCoefficients> coeffs_;
};

struct Trajectory {
  PathResult result;
  std::vector<double> states;  // Z_j for the transformed scheme, X_j otherwise
  std::vector<StepTerms> terms;
  int completed_steps = 0;
};

Trajectory run(const Stepper& stepper, int n, const Eigen::Ref<const Eigen::VectorXd>& dw,
               double x0) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (dw.size() != n) throw std::invalid_argument("increments must have length n");

  Trajectory tr;
  tr.result.n = n;
  tr.result.values = Eigen::VectorXd::Constant(n + 1, kNaN);
  tr.result.values[0] = x0;
  tr.states.assign(static_cast<std::size_t>(n) + 1, kNaN);
  tr.terms.reserve(static_cast<std::size_t>(n));

  const double h = 1.0 / n;
  double state = stepper.initial_state();
  tr.states[0] = state;
  for (int j = 0; j < n; ++j) {
    StepTerms s;
    try {
      s = stepper.terms(state);
    } catch (const EvalError& e) {
      if (e.kind() != EvalErrorKind::Overflow) throw;
      if (j > 0) tr.result.values[j] = stepper.to_x(state);
      tr.result.overflow = true;
      return tr;
    }
    if (j > 0) tr.result.values[j] = s.x;
    tr.terms.push_back(s);
    state = state + s.drift * h + s.sigma * dw[j];
    tr.states[static_cast<std::size_t>(j) + 1] = state;
    tr.completed_steps = j + 1;
    if (!std::isfinite(state)) {
      tr.result.values[j + 1] = state;
      tr.result.overflow = true;
      return tr;
    }
  }
  tr.result.values[n] = stepper.to_x(state);
  return tr;
}

}  // namespace

PathResult simulate_path(const SdeProblem& problem, SchemeKind kind, int n,
                         const Eigen::Ref<const Eigen::VectorXd>& increments,
                         const Transform* transform) {
  const Stepper stepper(problem, kind, n, transform);
  return run(stepper, n, increments, problem.x0).result;
}

PathResult interpolate_on_fine_grid(const SdeProblem& problem, SchemeKind kind, int n,
                                    const BrownianLattice& lattice, int refine,
                                    const Transform* transform) {
  if (refine < 1) throw std::invalid_argument("refine must be >= 1");
  if (static_cast<long long>(n) * refine != lattice.n_fine)
    throw std::invalid_argument("lattice.n_fine must equal n * refine");

  const Stepper stepper(problem, kind, n, transform);
  Trajectory tr = run(stepper, n, coarsen(lattice, refine), problem.x0);
  PathResult& out = tr.result;

  const int fine_n = n * refine;
  out.fine_values = Eigen::VectorXd::Constant(fine_n + 1, kNaN);
  const double fine_h = 1.0 / fine_n;
  for (int j = 0; j < tr.completed_steps; ++j) {
    const StepTerms& s = tr.terms[static_cast<std::size_t>(j)];
    const double z = tr.states[static_cast<std::size_t>(j)];
    out.fine_values[j * refine] = out.values[j];
    double w = 0.0;
    for (int m = 1; m < refine; ++m) {
      w += lattice.increments[j * refine + m - 1];
      const double zt = z + s.drift * (m * fine_h) + s.sigma * w;
      out.fine_values[j * refine + m] = std::isfinite(zt) ? stepper.to_x(zt) : zt;
    }
  }
  if (!out.overflow) out.fine_values[fine_n] = out.values[n];
  return out;
}

TamingGrowthReport taming_growth_check(const SdeProblem& problem, const std::vector<int>& n_list,
                                       const Eigen::Ref<const Eigen::VectorXd>& x_grid) {
  TamingGrowthReport report;
  report.gamma = taming_exponent(problem.ell);
  report.n_list = n_list;

  std::vector<double> mu(static_cast<std::size_t>(x_grid.size()));
  for (Eigen::Index i = 0; i < x_grid.size(); ++i)
    mu[static_cast<std::size_t>(i)] = evaluate(problem.drift, x_grid[i], Side::Exact);

  for (int n : n_list) {
    const double scale = std::pow(static_cast<double>(n), 1.0 - report.gamma);
    double sup = 0.0;
    for (Eigen::Index i = 0; i < x_grid.size(); ++i) {
      const double ratio =
          std::abs(tame(mu[static_cast<std::size_t>(i)], n)) / (scale * (1.0 + std::abs(x_grid[i])));
      sup = std::max(sup, ratio);
    }
    report.sup_ratio.push_back(sup);
  }

  report.envelope.resize(report.sup_ratio.size());
  double running = 0.0;
  for (std::size_t k = report.sup_ratio.size(); k-- > 0;) {
    running = std::max(running, report.sup_ratio[k]);
    report.envelope[k] = running;
  }
  if (!report.sup_ratio.empty()) {
    const auto [lo, hi] = std::minmax_element(report.sup_ratio.begin(), report.sup_ratio.end());
    report.sup = *hi;
    report.spread = *hi == 0.0 ? 1.0 : *hi / *lo;
  }
  return report;
}

}  // namespace sdelab
