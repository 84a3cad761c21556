#pragma once

// Monte Carlo size study for the GSV monotonicity test under f == 0.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/numeric.hpp"
#include "ujack/rng.hpp"
#include "ujack/sample.hpp"
#include "ujack/stattests.hpp"

namespace ujack {

struct SimConfig {
  std::size_t n = 100;
  ErrorKind error = GaussianErrors{0.1};
  std::size_t reps = 500;
  std::size_t boot = 500;
  std::vector<double> alphas{0.05, 0.10};
  double grid_min = 0.05;
  double grid_max = 0.95;
  std::size_t grid_points = 19;
  double bandwidth_exponent = 0.2;  // b = n^{-bandwidth_exponent}
  std::uint64_t seed = 0;

  double bandwidth() const { return std::pow(static_cast<double>(n), -bandwidth_exponent); }

  void validate() const {
    if (n < 3) throw InvalidParameter("n must be at least 3");
    if (reps < 1) throw InvalidParameter("reps must be at least 1");
    if (boot < 1) throw InvalidParameter("boot must be at least 1");
    if (alphas.empty()) throw InvalidParameter("alpha_list is empty");
    for (double a : alphas) {
      if (!(a > 0.0 && a < 1.0)) throw InvalidParameter("alphas must lie in (0, 1)");
    }
    if (!(bandwidth_exponent > 0.0)) throw InvalidParameter("bandwidth_exponent must be positive");
    if (grid_points < 1 || !(grid_min <= grid_max)) throw InvalidParameter("invalid grid");
  }
};

inline std::string error_kind_name(const ErrorKind& e) {
  return std::holds_alternative<GaussianErrors>(e) ? "gaussian" : "rademacher";
}

inline double error_kind_scale(const ErrorKind& e) {
  return std::holds_alternative<GaussianErrors>(e) ? std::get<GaussianErrors>(e).sd
                                                   : std::get<RademacherErrors>(e).scale;
}

namespace detail {

inline double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double d = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(d)) throw std::invalid_argument(value);
    return d;
  } catch (const std::exception&) {
    throw InvalidParameter("config key '" + key + "': cannot parse '" + value + "'");
  }
}

inline std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  if (value.empty() || value.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidParameter("config key '" + key + "': expected a nonnegative integer, got '" + value + "'");
  }
  try {
    return std::stoull(value);
  } catch (const std::exception&) {
    throw InvalidParameter("config key '" + key + "': out of range");
  }
}

}  // namespace detail

// Flat key=value text; '#' starts a comment. error is "gaussian" or
// "rademacher", optionally with ":scale" (default 0.1). alpha_list is
// comma-separated. Returns the config and whether a seed key was present.
inline std::pair<SimConfig, bool> parse_sim_config(const std::string& text) {
  SimConfig cfg;
  bool has_seed = false;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidParameter("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key == "n") {
      cfg.n = detail::parse_unsigned(key, value);
    } else if (key == "error") {
      const auto colon = value.find(':');
      const std::string kind = value.substr(0, colon);
      const double scale = colon == std::string::npos ? 0.1 : detail::parse_double(key, value.substr(colon + 1));
      if (!(scale > 0.0)) throw InvalidParameter("error scale must be positive");
      if (kind == "gaussian") {
        cfg.error = GaussianErrors{scale};
      } else if (kind == "rademacher") {
        cfg.error = RademacherErrors{scale};
      } else {
        throw InvalidParameter("unknown error kind '" + kind + "' (valid: gaussian, rademacher)");
      }
    } else if (key == "reps") {
      cfg.reps = detail::parse_unsigned(key, value);
    } else if (key == "boot") {
      cfg.boot = detail::parse_unsigned(key, value);
    } else if (key == "alpha_list") {
      cfg.alphas.clear();
      for (const auto& cell : detail::split_csv_line(value)) cfg.alphas.push_back(detail::parse_double(key, detail::trim(cell)));
    } else if (key == "grid_min") {
      cfg.grid_min = detail::parse_double(key, value);
    } else if (key == "grid_max") {
      cfg.grid_max = detail::parse_double(key, value);
    } else if (key == "grid_points") {
      cfg.grid_points = detail::parse_unsigned(key, value);
    } else if (key == "bandwidth_exponent") {
      cfg.bandwidth_exponent = detail::parse_double(key, value);
    } else if (key == "seed") {
      cfg.seed = detail::parse_unsigned(key, value);
      has_seed = true;
    } else {
      throw InvalidParameter("unknown config key '" + key + "'");
    }
  }
  cfg.validate();
  return {cfg, has_seed};
}

struct SimResult {
  SimConfig config;
  std::vector<double> rates;     // one per config.alphas
  std::vector<double> p_values;  // replication order; NaN for failed replications
  std::vector<double> statistics;
  std::size_t failed = 0;
  double runtime_seconds = 0.0;

  std::size_t completed() const { return p_values.size() - failed; }
};

inline SimResult run_size_study(const SimConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const double b = config.bandwidth();
  const auto grid = ThetaGrid::equidistant(config.grid_min, config.grid_max, config.grid_points, 1, {b});

  const std::size_t M = config.reps;
  std::vector<double> pvals(M, NAN);
  std::vector<double> stats(M, NAN);
  std::vector<std::vector<char>> rejected(M, std::vector<char>(config.alphas.size(), 0));
  std::vector<char> failed(M, 0);

  parallel_for(M, [&](std::size_t k) {
    const std::uint64_t rep_seed = derive_seed(config.seed, Stream::kReplication, k);
    try {
      const auto sample = synthesize_null_regression(config.n, config.error, rep_seed);
      const auto out = run_test_detailed(sample, Method::kGsv, grid, {config.boot, rep_seed}, config.alphas.front());
      pvals[k] = out.report.p_value;
      stats[k] = out.report.statistic;
      for (std::size_t a = 0; a < config.alphas.size(); ++a) {
        rejected[k][a] = out.report.statistic > quantile(out.draws, 1.0 - config.alphas[a]);
      }
    } catch (const std::exception&) {
      failed[k] = 1;
    }
  });

  SimResult res;
  res.config = config;
  res.p_values = std::move(pvals);
  res.statistics = std::move(stats);
  res.failed = static_cast<std::size_t>(std::count(failed.begin(), failed.end(), 1));
  const double done = static_cast<double>(M - res.failed);
  for (std::size_t a = 0; a < config.alphas.size(); ++a) {
    std::size_t count = 0;
    for (std::size_t k = 0; k < M; ++k) count += !failed[k] && rejected[k][a];
    res.rates.push_back(done > 0 ? static_cast<double>(count) / done : NAN);
  }
  res.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return res;
}

struct CurvePoint {
  double alpha;
  double rate;
};

// Fraction of recorded p-values <= alpha for alpha = 0.01, 0.02, ..., 0.99.
inline std::vector<CurvePoint> emit_rejection_curve(const SimResult& result) {
  std::vector<double> p;
  for (double v : result.p_values) {
    if (!std::isnan(v)) p.push_back(v);
  }
  std::sort(p.begin(), p.end());
  std::vector<CurvePoint> curve;
  for (int k = 1; k <= 99; ++k) {
    const double alpha = k / 100.0;
    const auto count = std::upper_bound(p.begin(), p.end(), alpha) - p.begin();
    curve.push_back({alpha, p.empty() ? NAN : static_cast<double>(count) / static_cast<double>(p.size())});
  }
  return curve;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "alpha,rate\n";
  char buf[64];
  for (const auto& c : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", c.alpha, c.rate);
    out += buf;
  }
  return out;
}

// One-sample Kolmogorov-Smirnov distance to Uniform[0,1].
inline double ks_uniform_distance(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double f = std::clamp(values[i], 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic Kolmogorov tail with Stephens' small-sample correction.
inline double ks_p_value(double distance, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * distance;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(sum, 0.0, 1.0);
}

// Half-width of the Dvoretzky-Kiefer-Wolfowitz band at confidence 1 - level.
inline double dkw_half_width(std::size_t n, double level) {
  return std::sqrt(std::log(2.0 / level) / (2.0 * static_cast<double>(n)));
}

}  // namespace ujack
