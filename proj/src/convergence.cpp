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

#include "sdelab/convergence.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include <Eigen/Dense>

#include "sdelab/brownian.hpp"

namespace sdelab {

namespace {

constexpr double kZ95 = 1.959963984540054;

[[noreturn]] void invalid(const std::string& what) {
  throw ConvergenceError(ConvergenceErrorKind::ConfigInvalid, what);
}

// Runs body(path_id) for every path. Each call writes only its own slots, so
// results are independent of the worker count.
void for_each_path(int m_paths, int threads, const std::function<void(int)>& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(1, m_paths));
  if (workers == 1) {
    for (int i = 0; i < m_paths; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < m_paths; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = m_paths;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void check_n_list(const std::vector<int>& n_list) {
  if (n_list.empty()) invalid("n_list must not be empty");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (n_list[k] < 1) invalid("n_list entries must be >= 1");
    if (k > 0 && n_list[k] <= n_list[k - 1]) invalid("n_list must be strictly increasing");
  }
}

void check_p_list(const std::vector<double>& p_list) {
  if (p_list.empty()) invalid("p_list must not be empty");
  for (double p : p_list)
    if (!(p >= 1.0) || !std::isfinite(p)) invalid("p values must be finite and >= 1");
}

void check_transform(SchemeKind scheme, const Transform* transform) {
  if (scheme == SchemeKind::TransformedTamedEuler && transform == nullptr)
    invalid("transformed scheme requires a transform");
}

bool tamed(SchemeKind scheme) { return scheme != SchemeKind::EulerMaruyama; }

[[noreturn]] void overflow_in_estimate(SchemeKind scheme, int path) {
  throw ConvergenceError(ConvergenceErrorKind::OverflowInEstimate,
                         std::string("scheme ") + to_string(scheme) + " overflowed on path " +
                             std::to_string(path));
}

std::vector<std::optional<RateFit>> fit_all(const std::vector<ConvergenceRow>& rows,
                                            std::size_t p_count) {
  std::vector<std::optional<RateFit>> fits(p_count);
  if (rows.size() < 3) return fits;
  std::vector<int> ns;
  for (const auto& r : rows) ns.push_back(r.n);
  for (std::size_t k = 0; k < p_count; ++k) {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.per_p[k].estimate);
    if (std::all_of(v.begin(), v.end(), [](double e) { return e > 0.0 && std::isfinite(e); }))
      fits[k] = fit_rate(ns, v);
  }
  return fits;
}

}  // namespace

RateFit fit_rate(const std::vector<int>& n, const std::vector<double>& values) {
  if (n.size() != values.size()) invalid("fit_rate needs one value per n");
  if (n.size() < 3)
    throw ConvergenceError(ConvergenceErrorKind::TooFewRows, "fit_rate needs at least 3 rows");
  const auto rows = static_cast<Eigen::Index>(n.size());
  Eigen::MatrixXd design(rows, 2);
  Eigen::VectorXd target(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double v = values[static_cast<std::size_t>(i)];
    if (!(v > 0.0))
      throw ConvergenceError(ConvergenceErrorKind::ZeroErrorRow,
                             "non-positive value at n = " + std::to_string(n[static_cast<std::size_t>(i)]));
    design(i, 0) = 1.0;
    design(i, 1) = -std::log2(static_cast<double>(n[static_cast<std::size_t>(i)]));
    target[i] = std::log2(v);
  }
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(target);
  const Eigen::VectorXd residual = target - design * coef;
  const double ss_res = residual.squaredNorm();
  const double ss_tot = (target.array() - target.mean()).matrix().squaredNorm();
  return {coef[1], coef[0], ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0};
}

LpEstimate lp_estimate(const std::vector<double>& values, double p) {
  const auto m = static_cast<double>(values.size());
  if (values.empty()) return {};
  double sum = 0.0;
  for (double v : values) sum += std::pow(v, p);
  const double mean = sum / m;
  double ss = 0.0;
  for (double v : values) {
    const double d = std::pow(v, p) - mean;
    ss += d * d;
  }
  const double se = values.size() > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  LpEstimate out;
  out.estimate = std::pow(mean, 1.0 / p);
  out.ci_halfwidth = mean > 0.0 ? kZ95 * se * std::pow(mean, 1.0 / p - 1.0) / p : 0.0;
  return out;
}

ConvergenceReport estimate_strong_error(const SdeProblem& problem, const ConvergenceConfig& config,
                                        const Transform* transform) {
  check_n_list(config.n_list);
  check_p_list(config.p_list);
  check_transform(config.scheme, transform);
  if (config.m_paths < 1) invalid("m_paths must be >= 1");
  if (config.n_ref < 1) invalid("n_ref must be >= 1");
  for (int n : config.n_list)
    if (config.n_ref % n != 0) invalid("n = " + std::to_string(n) + " does not divide n_ref");
  if (config.n_ref / config.n_list.back() < 4) invalid("n_ref must be at least 4 * max(n_list)");

  const std::size_t levels = config.n_list.size();
  const auto paths = static_cast<std::size_t>(config.m_paths);
  std::vector<double> errors(paths * levels, 0.0);
  std::vector<char> bad(paths * levels, 0);
  std::vector<char> ref_bad(paths, 0);

  for_each_path(config.m_paths, config.threads, [&](int path) {
    const auto ip = static_cast<std::size_t>(path);
    const BrownianLattice lattice = sample(config.master_seed, static_cast<std::uint64_t>(path), config.n_ref);
    const PathResult ref = simulate_path(problem, config.scheme, config.n_ref, lattice.increments, transform);
    ref_bad[ip] = ref.overflow;
    for (std::size_t k = 0; k < levels; ++k) {
      const int n = config.n_list[k];
      const int factor = config.n_ref / n;
      const PathResult coarse = simulate_path(problem, config.scheme, n, coarsen(lattice, factor), transform);
      bad[ip * levels + k] = coarse.overflow;
      double e = 0.0;
      if (config.error_norm == ErrorNorm::Endpoint) {
        e = std::abs(ref.values[config.n_ref] - coarse.values[n]);
      } else {
        for (int j = 0; j <= n; ++j)
          e = std::max(e, std::abs(ref.values[j * factor] - coarse.values[j]));
      }
      errors[ip * levels + k] = e;
    }
  });

  ConvergenceReport report;
  report.p_list = config.p_list;
  report.overflow_counts.assign(levels, 0);
  for (std::size_t ip = 0; ip < paths; ++ip) {
    if (ref_bad[ip]) {
      if (tamed(config.scheme)) overflow_in_estimate(config.scheme, static_cast<int>(ip));
      ++report.reference_overflows;
    }
  }
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<double> e;
    e.reserve(paths);
    for (std::size_t ip = 0; ip < paths; ++ip) {
      if (bad[ip * levels + k] || ref_bad[ip]) {
        if (tamed(config.scheme)) overflow_in_estimate(config.scheme, static_cast<int>(ip));
        ++report.overflow_counts[k];
        continue;
      }
      e.push_back(errors[ip * levels + k]);
    }
    ConvergenceRow row{config.n_list[k], {}};
    for (double p : config.p_list) row.per_p.push_back(lp_estimate(e, p));
    report.rows.push_back(std::move(row));
  }
  report.fits = fit_all(report.rows, config.p_list.size());
  return report;
}

SignChangeReport sign_change_statistic(const SdeProblem& problem, const SignChangeConfig& config,
                                       const Transform* transform) {
  check_n_list(config.n_list);
  check_p_list(config.p_list);
  check_transform(config.scheme, transform);
  if (config.m_paths < 1) invalid("m_paths must be >= 1");
  if (config.refine < 8) invalid("refine must be >= 8");
  if (!std::isfinite(config.xi)) invalid("xi must be finite");
  const int n_max = config.n_list.back();
  for (int n : config.n_list)
    if (n_max % n != 0) invalid("every n must divide max(n_list)");

  SignChangeReport report;
  report.p_list = config.p_list;
  if (!(std::abs(evaluate(problem.diffusion, config.xi, Side::Exact)) > 1e-12))
    report.warnings.push_back("sigma vanishes at xi; the occupation bound needs sigma(xi) != 0");

  const std::size_t levels = config.n_list.size();
  const auto paths = static_cast<std::size_t>(config.m_paths);
  std::vector<double> stat(paths * levels, 0.0);
  std::vector<char> bad(paths * levels, 0);

  for_each_path(config.m_paths, config.threads, [&](int path) {
    const auto ip = static_cast<std::size_t>(path);
    const BrownianLattice finest =
        sample(config.master_seed, static_cast<std::uint64_t>(path), n_max * config.refine);
    for (std::size_t k = 0; k < levels; ++k) {
      const int n = config.n_list[k];
      const BrownianLattice lattice{finest.master_seed, finest.path_id, n * config.refine,
                                    coarsen(finest, n_max / n)};
      const PathResult r =
          interpolate_on_fine_grid(problem, config.scheme, n, lattice, config.refine, transform);
      if (r.overflow) {
        bad[ip * levels + k] = 1;
        continue;
      }
      const int fine_n = n * config.refine;
      int hits = 0;
      for (int m = 0; m < fine_n; ++m) {
        const double grid_value = r.values[m / config.refine];
        if ((r.fine_values[m] - config.xi) * (grid_value - config.xi) <= 0.0) ++hits;
      }
      stat[ip * levels + k] = static_cast<double>(hits) / fine_n;
    }
  });

  report.overflow_counts.assign(levels, 0);
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<double> s;
    s.reserve(paths);
    for (std::size_t ip = 0; ip < paths; ++ip) {
      if (bad[ip * levels + k]) {
        if (tamed(config.scheme)) overflow_in_estimate(config.scheme, static_cast<int>(ip));
        ++report.overflow_counts[k];
        continue;
      }
      s.push_back(stat[ip * levels + k]);
    }
    ConvergenceRow row{config.n_list[k], {}};
    for (double p : config.p_list) row.per_p.push_back(lp_estimate(s, p));
    report.rows.push_back(std::move(row));
  }
  report.fits = fit_all(report.rows, config.p_list.size());
  return report;
}

MomentReport moment_estimate(const SdeProblem& problem, const MomentConfig& config,
                             const Transform* transform) {
  check_n_list(config.n_list);
  check_p_list({config.p});
  check_transform(config.scheme, transform);
  if (config.m_paths < 1) invalid("m_paths must be >= 1");
  const int n_max = config.n_list.back();
  for (int n : config.n_list)
    if (n_max % n != 0) invalid("every n must divide max(n_list)");

  const std::size_t levels = config.n_list.size();
  const auto paths = static_cast<std::size_t>(config.m_paths);
  std::vector<double> sups(paths * levels, 0.0);
  std::vector<char> bad(paths * levels, 0);

  for_each_path(config.m_paths, config.threads, [&](int path) {
    const auto ip = static_cast<std::size_t>(path);
    const BrownianLattice lattice = sample(config.master_seed, static_cast<std::uint64_t>(path), n_max);
    for (std::size_t k = 0; k < levels; ++k) {
      const int n = config.n_list[k];
      const PathResult r =
          simulate_path(problem, config.scheme, n, coarsen(lattice, n_max / n), transform);
      bad[ip * levels + k] = r.overflow;
      if (!r.overflow) sups[ip * levels + k] = r.values.cwiseAbs().maxCoeff();
    }
  });

  MomentReport report;
  report.overflow_counts.assign(levels, 0);
  for (std::size_t k = 0; k < levels; ++k) {
    std::vector<double> s;
    for (std::size_t ip = 0; ip < paths; ++ip) {
      if (bad[ip * levels + k]) {
        if (tamed(config.scheme)) overflow_in_estimate(config.scheme, static_cast<int>(ip));
        ++report.overflow_counts[k];
        continue;
      }
      s.push_back(sups[ip * levels + k]);
    }
    report.rows.push_back({config.n_list[k], lp_estimate(s, config.p)});
  }
  return report;
}

}  // namespace sdelab
