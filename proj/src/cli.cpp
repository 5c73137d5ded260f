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

#include "sdelab/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sdelab/convergence.hpp"
#include "sdelab/model.hpp"
#include "sdelab/schemes.hpp"
#include "sdelab/transform.hpp"

namespace sdelab::cli {

using nlohmann::json;

std::string format_real(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", precision, value);
  return buf;
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

// Raised for anything that should map to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw UsageError(where + " must be a JSON object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) throw UsageError("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T required(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw UsageError("missing key '" + std::string(key) + "' in " + where);
  return obj.at(key).get<T>();
}

template <typename T>
T optional_or(const json& obj, const char* key, T fallback) {
  return obj.contains(key) ? obj.at(key).get<T>() : fallback;
}

template <typename T>
std::optional<T> optional_of(const json& obj, const char* key) {
  if (!obj.contains(key)) return std::nullopt;
  return obj.at(key).get<T>();
}

struct RunConfig {
  json doc;
  SdeProblem problem;
  std::optional<std::string> csv_path;
  int precision = 17;
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("malformed JSON: ") + e.what());
  }
  check_keys(doc, {"problem", "validate", "simulate", "converge", "signchange", "transform_check", "output"},
             "config");
  const json& p = doc.contains("problem") ? doc.at("problem") : throw UsageError("missing 'problem' block");
  check_keys(p, {"drift", "diffusion", "breakpoints", "ell", "x0"}, "problem");
  SdeProblem problem = make_problem(required<std::string>(p, "drift", "problem"),
                                    required<std::string>(p, "diffusion", "problem"),
                                    optional_or<std::vector<double>>(p, "breakpoints", {}),
                                    required<double>(p, "ell", "problem"),
                                    required<double>(p, "x0", "problem"));
  RunConfig cfg{doc, std::move(problem), std::nullopt, 17};
  if (doc.contains("output")) {
    const json& o = doc.at("output");
    check_keys(o, {"csv_path", "precision"}, "output");
    cfg.csv_path = optional_of<std::string>(o, "csv_path");
    cfg.precision = optional_or<int>(o, "precision", 17);
    if (cfg.precision < 1 || cfg.precision > 17) throw UsageError("output.precision must be in [1, 17]");
  }
  return cfg;
}

const json& command_block(const RunConfig& cfg, const char* name) {
  if (!cfg.doc.contains(name)) throw UsageError(std::string("missing '") + name + "' block");
  return cfg.doc.at(name);
}

SchemeKind scheme_of(const json& block) {
  try {
    return scheme_from_string(optional_or<std::string>(block, "scheme", "tamed_euler"));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::uint64_t seed_of(const json& block, std::optional<std::uint64_t> override_seed) {
  return override_seed ? *override_seed : optional_or<std::uint64_t>(block, "seed", 0);
}

// Writes CSV text to the configured path, or to `out` when none is set.
void emit_csv(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (!cfg.csv_path) {
    out << text;
    return;
  }
  std::ofstream file(*cfg.csv_path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + *cfg.csv_path + "'");
  file << text;
  out << "wrote " << *cfg.csv_path << '\n';
}

std::optional<Transform> transform_for(SchemeKind scheme, const SdeProblem& problem) {
  if (scheme != SchemeKind::TransformedTamedEuler) return std::nullopt;
  return build_transform(problem);
}

int cmd_validate(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::ostream& out) {
  CheckGrid grid;
  if (cfg.doc.contains("validate")) {
    const json& v = cfg.doc.at("validate");
    check_keys(v, {"range", "count", "pair_count", "seed", "onesided_cap", "growth_cap", "sigma_lipschitz_cap"},
               "validate");
    if (v.contains("range")) {
      const auto r = v.at("range").get<std::vector<double>>();
      if (r.size() != 2) throw UsageError("validate.range must be [lo, hi]");
      grid.lo = r[0];
      grid.hi = r[1];
    }
    grid.count = optional_or<int>(v, "count", grid.count);
    grid.pair_count = optional_or<int>(v, "pair_count", grid.pair_count);
    grid.seed = optional_or<std::uint64_t>(v, "seed", grid.seed);
    grid.onesided_cap = optional_of<double>(v, "onesided_cap");
    grid.growth_cap = optional_of<double>(v, "growth_cap");
    grid.sigma_lipschitz_cap = optional_of<double>(v, "sigma_lipschitz_cap");
  }
  if (seed) grid.seed = *seed;
  const ValidationReport r = validate(cfg.problem, grid);
  const int prec = cfg.precision;
  out << "# ok=" << (r.ok ? "true" : "false") << '\n'
      << "# gamma=" << format_real(r.gamma, prec) << '\n'
      << "# lambda_hat=" << format_real(r.lambda_hat, prec) << '\n'
      << "# onesided_c_hat=" << format_real(r.onesided_c_hat, prec) << '\n'
      << "# growth_c_hat=" << format_real(r.growth_c_hat, prec) << '\n'
      << "# sigma_lip_hat=" << format_real(r.sigma_lip_hat, prec) << '\n'
      << "# khasminskii_c_hat=" << format_real(r.khasminskii_c_hat, prec) << '\n';
  for (const Violation& v : r.violations) {
    out << v.condition << '\t' << format_real(v.x, prec);
    if (v.y) out << ',' << format_real(*v.y, prec);
    out << '\t' << format_real(v.value, prec) << '\n';
  }
  return r.ok ? kSuccess : kDomainFailure;
}

int cmd_simulate(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::ostream& out,
                 std::ostream& err) {
  const json& s = command_block(cfg, "simulate");
  check_keys(s, {"scheme", "n", "seed", "path_id"}, "simulate");
  const SchemeKind scheme = scheme_of(s);
  const int n = required<int>(s, "n", "simulate");
  if (n < 1) throw UsageError("simulate.n must be >= 1");
  const auto path_id = optional_or<std::uint64_t>(s, "path_id", 0);
  const auto transform = transform_for(scheme, cfg.problem);
  const BrownianLattice lattice = sample(seed_of(s, seed), path_id, n);
  const PathResult r =
      simulate_path(cfg.problem, scheme, n, lattice.increments, transform ? &*transform : nullptr);

  std::string csv = "t,value\n";
  for (int j = 0; j <= n; ++j)
    csv += format_real(static_cast<double>(j) / n, cfg.precision) + ',' +
           format_real(r.values[j], cfg.precision) + '\n';
  emit_csv(cfg, csv, out);
  if (r.overflow) {
    err << "scheme " << to_string(scheme) << " overflowed\n";
    return kDomainFailure;
  }
  return kSuccess;
}

std::string rate_table(const std::vector<double>& p_list, const std::vector<ConvergenceRow>& rows,
                       const std::vector<std::optional<RateFit>>& fits, const char* value_column,
                       int precision) {
  std::string csv = std::string("n,h,p,") + value_column + ",ci_halfwidth\n";
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < p_list.size(); ++k) {
      csv += std::to_string(row.n) + ',' + format_real(1.0 / row.n, precision) + ',' +
             format_real(p_list[k], precision) + ',' + format_real(row.per_p[k].estimate, precision) +
             ',' + format_real(row.per_p[k].ci_halfwidth, precision) + '\n';
    }
  }
  for (std::size_t k = 0; k < p_list.size(); ++k) {
    csv += csv_field("# slope") + ',' + format_real(p_list[k], precision) + ',' +
           (fits[k] ? format_real(fits[k]->slope, precision) : std::string("nan")) + '\n';
  }
  return csv;
}

int cmd_converge(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::ostream& out,
                 std::ostream& err) {
  const json& c = command_block(cfg, "converge");
  check_keys(c, {"scheme", "n_list", "n_ref", "m_paths", "p_list", "seed", "error_norm", "threads"},
             "converge");
  ConvergenceConfig config;
  config.scheme = scheme_of(c);
  config.n_list = required<std::vector<int>>(c, "n_list", "converge");
  config.n_ref = required<int>(c, "n_ref", "converge");
  config.m_paths = required<int>(c, "m_paths", "converge");
  config.p_list = optional_or<std::vector<double>>(c, "p_list", {2.0});
  config.master_seed = seed_of(c, seed);
  config.threads = optional_or<int>(c, "threads", 0);
  const auto norm = optional_or<std::string>(c, "error_norm", "endpoint");
  if (norm == "endpoint")
    config.error_norm = ErrorNorm::Endpoint;
  else if (norm == "sup_on_coarse_grid")
    config.error_norm = ErrorNorm::SupOnCoarseGrid;
  else
    throw UsageError("converge.error_norm must be 'endpoint' or 'sup_on_coarse_grid'");

  const auto transform = transform_for(config.scheme, cfg.problem);
  const ConvergenceReport r =
      estimate_strong_error(cfg.problem, config, transform ? &*transform : nullptr);
  for (std::size_t k = 0; k < r.rows.size(); ++k)
    if (r.overflow_counts[k] > 0)
      err << "n=" << r.rows[k].n << ": " << r.overflow_counts[k] << " overflowed paths excluded\n";
  emit_csv(cfg, rate_table(r.p_list, r.rows, r.fits, "error", cfg.precision), out);
  return kSuccess;
}

int cmd_signchange(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::ostream& out,
                   std::ostream& err) {
  const json& c = command_block(cfg, "signchange");
  check_keys(c, {"scheme", "n_list", "refine", "xi", "m_paths", "p_list", "seed", "threads"}, "signchange");
  SignChangeConfig config;
  config.scheme = scheme_of(c);
  config.n_list = required<std::vector<int>>(c, "n_list", "signchange");
  config.refine = optional_or<int>(c, "refine", 16);
  config.m_paths = required<int>(c, "m_paths", "signchange");
  config.p_list = optional_or<std::vector<double>>(c, "p_list", {1.0, 2.0});
  config.master_seed = seed_of(c, seed);
  config.threads = optional_or<int>(c, "threads", 0);
  if (c.contains("xi")) {
    config.xi = c.at("xi").get<double>();
  } else if (!cfg.problem.breakpoints.empty()) {
    config.xi = cfg.problem.breakpoints.front();
  } else {
    throw UsageError("signchange.xi is required when the problem has no breakpoints");
  }

  const auto transform = transform_for(config.scheme, cfg.problem);
  const SignChangeReport r =
      sign_change_statistic(cfg.problem, config, transform ? &*transform : nullptr);
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  emit_csv(cfg, rate_table(r.p_list, r.rows, r.fits, "statistic", cfg.precision), out);
  return kSuccess;
}

int cmd_transform_check(const RunConfig& cfg, std::optional<std::uint64_t> seed, std::ostream& out) {
  json block = cfg.doc.contains("transform_check") ? cfg.doc.at("transform_check") : json::object();
  check_keys(block, {"grid_count", "roundtrip_count", "roundtrip_range", "seed"}, "transform_check");
  const int grid_count = optional_or<int>(block, "grid_count", 100000);
  const int roundtrip_count = optional_or<int>(block, "roundtrip_count", 1000);
  const auto range = optional_or<std::vector<double>>(block, "roundtrip_range", {-5.0, 5.0});
  if (grid_count < 2 || roundtrip_count < 1 || range.size() != 2 || !(range[0] < range[1]))
    throw UsageError("transform_check needs grid_count >= 2, roundtrip_count >= 1, roundtrip_range [lo, hi]");

  const SdeProblem& problem = cfg.problem;
  const Transform t = build_transform(problem);
  const int prec = cfg.precision;
  bool all_ok = true;
  auto line = [&](const std::string& name, double value, const std::string& limit, bool ok) {
    out << name << '\t' << format_real(value, prec) << '\t' << limit << '\t' << (ok ? "PASS" : "FAIL") << '\n';
    all_ok = all_ok && ok;
  };

  const double lo = (problem.breakpoints.empty() ? problem.x0 : problem.breakpoints.front()) - 2.0;
  const double hi = (problem.breakpoints.empty() ? problem.x0 : problem.breakpoints.back()) + 2.0;
  double gp_min = std::numeric_limits<double>::infinity();
  double gp_max = -gp_min;
  bool monotone = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_count; ++i) {
    const double x = lo + (hi - lo) * i / (grid_count - 1);
    const double gp = g_prime(t, x);
    gp_min = std::min(gp_min, gp);
    gp_max = std::max(gp_max, gp);
    const double gx = g(t, x);
    monotone = monotone && gx > prev;
    prev = gx;
  }
  line("g_prime_min", gp_min, ">=0.5", gp_min >= 0.5);
  line("g_prime_max", gp_max, "<=1.5", gp_max <= 1.5);
  line("g_strictly_increasing", monotone ? 1.0 : 0.0, "==1", monotone);

  std::mt19937_64 rng(seed ? *seed : optional_or<std::uint64_t>(block, "seed", 0));
  std::uniform_real_distribution<double> u(range[0], range[1]);
  double residual = 0.0;
  for (int i = 0; i < roundtrip_count; ++i) {
    const double x = u(rng);
    residual = std::max(residual, std::abs(g_inverse(t, g(t, x)) - x));
  }
  line("inverse_roundtrip_max", residual, "<=1e-10", residual <= 1e-10);

  const TransformedCoefficients coeffs(t, problem);
  for (const TransformBump& b : t.bumps) {
    const std::string at = "[xi=" + format_real(b.xi, prec) + "]";
    out << "alpha" << at << '\t' << format_real(b.alpha, prec) << '\t' << "-" << '\t' << "INFO" << '\n';
    const double jump = std::abs(evaluate(problem.drift, b.xi, Side::Right) -
                                 evaluate(problem.drift, b.xi, Side::Left));
    out << "drift_jump" << at << '\t' << format_real(jump, prec) << '\t' << "-" << '\t' << "INFO" << '\n';
    for (double offset : {1e-4, 1e-6, 1e-8}) {
      const double gap = std::abs(coeffs.mu_tilde(b.xi + offset) - coeffs.mu_tilde(b.xi - offset));
      line("mu_tilde_gap" + at + "[offset=" + format_real(offset, 3) + "]", gap,
           "<=" + format_real(100.0 * offset, 3), gap <= 100.0 * offset);
    }
  }
  return all_ok ? kSuccess : kDomainFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation laboratory for SDEs with discontinuous, superlinear drift", "sdelab"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  app.require_subcommand(1);
  const char* names[] = {"validate", "simulate", "converge", "signchange", "transform-check"};
  const char* help[] = {
      "check the coefficient assumptions on a sample grid",
      "write one path of a scheme as t,value CSV",
      "estimate coupled strong L_p errors and their rate",
      "estimate the sign-change occupation statistic and its rate",
      "certify the drift-smoothing transform",
  };
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], help[i]);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--seed", seed, "override the command's seed");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    const RunConfig cfg = load_config(config_path);
    if (command == "validate") return cmd_validate(cfg, seed, out);
    if (command == "simulate") return cmd_simulate(cfg, seed, out, err);
    if (command == "converge") return cmd_converge(cfg, seed, out, err);
    if (command == "signchange") return cmd_signchange(cfg, seed, out, err);
    return cmd_transform_check(cfg, seed, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const json::exception& e) {
    err << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "expression error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ModelError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ModelErrorKind::EmptyPiece ? kDomainFailure : kUsageError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return e.kind() == ConvergenceErrorKind::ConfigInvalid ? kUsageError : kDomainFailure;
  } catch (const TransformError& e) {
    err << "error: " << e.what() << '\n';
    return kDomainFailure;
  } catch (const EvalError& e) {
    err << "evaluation error: " << e.what() << '\n';
    return kDomainFailure;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  }
}

}  // namespace sdelab::cli
