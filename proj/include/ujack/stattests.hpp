#pragma once

// Sup-type tests built on a generalized local U-process:
//
//   S_n  = max_theta sqrt(n b^m) (U_n(h_theta) - P^r h_theta) / (r c_hat(theta))
//   S_n# = max_theta b^{m/2} U#(h_theta) / c_hat(theta)
//   c_hat(theta) = sqrt(b^m / n * sum_i (g[i][theta] - u[theta])^2)
//
// H0 is rejected when S_n exceeds the (1 - alpha) conditional quantile of S_n#.
// theta ranges over design points x bandwidths (x LLW thresholds).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/jmb.hpp"
#include "ujack/kernels.hpp"
#include "ujack/numeric.hpp"
#include "ujack/sample.hpp"
#include "ujack/ustat.hpp"

namespace ujack {

enum class Method { kGsv, kLlw, kAwSign, kAwRaw };

inline Method parse_method(const std::string& name) {
  if (name == "gsv") return Method::kGsv;
  if (name == "llw") return Method::kLlw;
  if (name == "aw-sign") return Method::kAwSign;
  if (name == "aw-raw") return Method::kAwRaw;
  throw InvalidParameter("unknown method '" + name + "' (valid: gsv, llw, aw-sign, aw-raw)");
}

inline std::string method_name(Method m) {
  switch (m) {
    case Method::kGsv: return "gsv";
    case Method::kLlw: return "llw";
    case Method::kAwSign: return "aw-sign";
    case Method::kAwRaw: return "aw-raw";
  }
  return "?";
}

inline std::size_t method_order(Method method, std::size_t m) {
  return (method == Method::kAwSign || method == Method::kAwRaw) ? m + 2 : 2;
}

struct ThetaGrid {
  std::vector<std::vector<double>> design_points;
  std::vector<double> bandwidths;    // sorted ascending
  std::vector<double> y_thresholds;  // LLW only

  // Tensor grid of `points` equidistant values per axis in [lo, hi]^m.
  static ThetaGrid equidistant(double lo, double hi, std::size_t points, std::size_t m,
                               std::vector<double> bandwidths) {
    if (points == 0) throw InvalidParameter("grid needs at least one point");
    if (!(lo <= hi)) throw InvalidParameter("grid_min must not exceed grid_max");
    if (m == 0) throw InvalidParameter("dimension must be positive");
    std::vector<double> axis(points);
    for (std::size_t k = 0; k < points; ++k) {
      axis[k] = points == 1 ? lo : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
    }
    ThetaGrid grid;
    std::vector<std::size_t> pos(m, 0);
    while (true) {
      std::vector<double> x(m);
      for (std::size_t j = 0; j < m; ++j) x[j] = axis[pos[j]];
      grid.design_points.push_back(std::move(x));
      std::size_t j = m;
      while (j > 0 && pos[j - 1] + 1 == points) pos[--j] = 0;
      if (j == 0) break;
      ++pos[j - 1];
    }
    grid.bandwidths = std::move(bandwidths);
    std::sort(grid.bandwidths.begin(), grid.bandwidths.end());
    return grid;
  }
};

struct ThetaPoint {
  std::vector<double> x;
  double b = 0.0;
  std::optional<double> y;  // LLW threshold
  bool negated = false;     // two-sided augmentation
};

struct TestOptions {
  std::string smoothing = "epanechnikov";
  bool two_sided = false;
  std::size_t incomplete_terms = 0;  // 0 = complete enumeration
  std::vector<double> centering;     // per base theta; empty = zeros
};

struct ThetaRow {
  ThetaPoint theta;
  double u = 0.0;
  double c_hat = 0.0;
  double contribution = 0.0;  // studentized value; NaN when dropped
  bool dropped = false;
};

struct TestReport {
  std::string method;
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t r = 0;
  std::vector<std::vector<double>> grid;
  std::vector<double> bandwidths;
  std::vector<double> y_grid;
  double statistic = 0.0;
  double critical_value = 0.0;
  double p_value = 1.0;
  bool reject = false;
  double alpha = 0.05;
  std::size_t boot = 0;
  std::uint64_t seed = 0;
  bool two_sided = false;
  std::vector<std::size_t> dropped_thetas;
  std::vector<ThetaRow> per_theta;
  std::vector<std::string> warnings;

  bool operator==(const TestReport& o) const;
};

namespace detail {
inline bool same_double(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }
}  // namespace detail

inline bool TestReport::operator==(const TestReport& o) const {
  if (per_theta.size() != o.per_theta.size()) return false;
  for (std::size_t t = 0; t < per_theta.size(); ++t) {
    const auto& a = per_theta[t];
    const auto& b = o.per_theta[t];
    if (a.theta.x != b.theta.x || a.theta.b != b.theta.b || a.theta.y != b.theta.y ||
        a.theta.negated != b.theta.negated || a.u != b.u || a.c_hat != b.c_hat ||
        !detail::same_double(a.contribution, b.contribution) || a.dropped != b.dropped) {
      return false;
    }
  }
  return method == o.method && n == o.n && m == o.m && r == o.r && grid == o.grid && bandwidths == o.bandwidths &&
         y_grid == o.y_grid && statistic == o.statistic && critical_value == o.critical_value &&
         p_value == o.p_value && reject == o.reject && alpha == o.alpha && boot == o.boot && seed == o.seed &&
         two_sided == o.two_sided && dropped_thetas == o.dropped_thetas;
}

struct TestOutcome {
  TestReport report;
  BootstrapDraws draws;
};

// c_hat(theta) = sqrt(b^m * C(theta, theta)).
inline std::vector<double> normalizing_constant_jackknife(const JackknifeTable& table, std::span<const double> b,
                                                          std::size_t m) {
  if (b.size() != table.thetas()) throw DimensionMismatch("one bandwidth per theta required");
  std::vector<double> c(table.thetas());
  for (std::size_t t = 0; t < c.size(); ++t) {
    c[t] = std::sqrt(std::pow(b[t], static_cast<double>(m)) * conditional_covariance(table, t, t));
  }
  return c;
}

inline std::vector<double> normalizing_constant_jackknife(const JackknifeTable& table, double b, std::size_t m) {
  const std::vector<double> bs(table.thetas(), b);
  return normalizing_constant_jackknife(table, bs, m);
}

// 1e-12 (1 + max_theta |u|) sqrt(b^m): below this c_hat carries no information.
inline double normalizer_floor(const JackknifeTable& table, double b, std::size_t m) {
  double umax = 0.0;
  for (std::size_t t = 0; t < table.thetas(); ++t) umax = std::max(umax, std::abs(table.u(t)));
  return 1e-12 * (1.0 + umax) * std::sqrt(std::pow(b, static_cast<double>(m)));
}

inline double studentized(double u, double centering, double c_hat, double b, std::size_t n, std::size_t m,
                          std::size_t r) {
  return std::sqrt(static_cast<double>(n) * std::pow(b, static_cast<double>(m))) * (u - centering) /
         (static_cast<double>(r) * c_hat);
}

// S_n over all theta; every c_hat must clear the floor.
inline double sup_statistic(const JackknifeTable& table, std::span<const double> c_hat, std::span<const double> b,
                            std::size_t m, std::size_t r, std::span<const double> centering) {
  const std::size_t T = table.thetas();
  if (c_hat.size() != T || b.size() != T) throw DimensionMismatch("per-theta vectors must match the table");
  if (!centering.empty() && centering.size() != T) throw DimensionMismatch("centering length mismatch");
  double best = -INFINITY;
  for (std::size_t t = 0; t < T; ++t) {
    if (!(c_hat[t] > normalizer_floor(table, b[t], m))) throw DegenerateNormalizer(t);
    const double center = centering.empty() ? 0.0 : centering[t];
    best = std::max(best, studentized(table.u(t), center, c_hat[t], b[t], table.n(), m, r));
  }
  return best;
}

namespace detail {

inline SymmetricKernel base_kernel(Method method, std::size_t m, std::optional<double> y) {
  switch (method) {
    case Method::kGsv: return gsv_base_kernel();
    case Method::kLlw: return llw_base_kernel(*y);
    case Method::kAwSign: return aw_base_kernel(SimplexMode::kSign, m);
    case Method::kAwRaw: return aw_base_kernel(SimplexMode::kRaw, m);
  }
  throw InvalidParameter("unknown method");
}

// Largest complete enumeration the AW test runs without an explicit
// incomplete engine: C(300, 3) tuples, i.e. n = 300 at m = 1.
inline constexpr double kCompleteTupleLimit = 4455100.0;

inline void validate_inputs(const Sample& sample, Method method, const ThetaGrid& grid, double alpha) {
  const std::size_t m = sample.m();
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  if (grid.design_points.empty()) throw InvalidParameter("grid has no design points");
  if (grid.bandwidths.empty()) throw InvalidParameter("bandwidth set is empty");
  for (double b : grid.bandwidths) {
    if (!(b > 0.0) || !std::isfinite(b)) throw InvalidParameter("bandwidths must be positive");
  }
  if (!std::is_sorted(grid.bandwidths.begin(), grid.bandwidths.end())) {
    throw InvalidParameter("bandwidths must be sorted");
  }
  for (const auto& x : grid.design_points) {
    if (x.size() != m) throw DimensionMismatch("design point dimension differs from covariate dimension");
  }
  if (method == Method::kGsv || method == Method::kLlw) {
    if (m != 1) throw InvalidParameter(method_name(method) + " requires a univariate covariate");
  }
  if (sample.p() != m + 1) throw InvalidParameter("payload must be (x_1..x_m, y)");
  if (method == Method::kLlw && grid.y_thresholds.empty()) {
    throw InvalidParameter("llw requires y thresholds");
  }
  const std::size_t r = method_order(method, m);
  if (sample.size() < r + 1) throw SampleTooSmall(sample.size(), r + 1);
}

}  // namespace detail

inline TestOutcome run_test_detailed(const Sample& sample, Method method, const ThetaGrid& grid,
                                     const MultiplierDrawPlan& plan, double alpha, const TestOptions& options = {}) {
  detail::validate_inputs(sample, method, grid, alpha);
  if (plan.draws == 0) throw InvalidParameter("bootstrap draw count must be at least 1");
  const std::size_t n = sample.size();
  const std::size_t m = sample.m();
  const std::size_t r = method_order(method, m);
  const auto smoothing = make_smoothing_kernel(options.smoothing, m);

  std::vector<ThetaPoint> thetas;
  std::vector<LocalKernelSpec> specs;
  const bool llw = method == Method::kLlw;
  const std::vector<std::optional<double>> ys =
      llw ? std::vector<std::optional<double>>(grid.y_thresholds.begin(), grid.y_thresholds.end())
          : std::vector<std::optional<double>>{std::nullopt};
  for (double b : grid.bandwidths) {
    for (const auto& x : grid.design_points) {
      for (const auto& y : ys) {
        thetas.push_back({x, b, y, false});
        specs.push_back(make_local_spec(detail::base_kernel(method, m, y), smoothing, x, b));
      }
    }
  }
  if (!options.centering.empty() && options.centering.size() != thetas.size()) {
    throw DimensionMismatch("centering needs one value per theta");
  }

  JackknifeTable table;
  if (options.incomplete_terms > 0) {
    table = jackknife_table_incomplete(sample, specs, options.incomplete_terms, plan.seed);
  } else {
    if (r > 2 && binomial(n, r) > detail::kCompleteTupleLimit) {
      throw InvalidParameter("complete enumeration of C(" + std::to_string(n) + "," + std::to_string(r) +
                             ") tuples is too large; pass an incomplete-terms count");
    }
    table = jackknife_table(sample, specs);
  }

  std::vector<double> centering = options.centering;
  if (centering.empty()) centering.assign(thetas.size(), 0.0);
  if (options.two_sided) {
    const std::size_t base = thetas.size();
    table = JackknifeTable::concat(table, table.negated());
    for (std::size_t t = 0; t < base; ++t) {
      thetas.push_back(thetas[t]);
      thetas.back().negated = true;
      centering.push_back(-centering[t]);
    }
  }

  std::vector<double> bs(thetas.size());
  for (std::size_t t = 0; t < thetas.size(); ++t) bs[t] = thetas[t].b;
  const auto c_hat = normalizing_constant_jackknife(table, bs, m);

  TestReport rep;
  rep.method = method_name(method);
  rep.n = n;
  rep.m = m;
  rep.r = r;
  rep.grid = grid.design_points;
  rep.bandwidths = grid.bandwidths;
  if (llw) rep.y_grid = grid.y_thresholds;
  rep.alpha = alpha;
  rep.boot = plan.draws;
  rep.seed = plan.seed;
  rep.two_sided = options.two_sided;

  std::vector<std::size_t> keep;
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    ThetaRow row{thetas[t], table.u(t), c_hat[t], NAN, false};
    if (c_hat[t] > normalizer_floor(table, bs[t], m)) {
      row.contribution = studentized(table.u(t), centering[t], c_hat[t], bs[t], n, m, r);
      keep.push_back(t);
    } else {
      row.dropped = true;
      rep.dropped_thetas.push_back(t);
    }
    rep.per_theta.push_back(std::move(row));
  }
  if (keep.empty()) throw AllThetaDegenerate();

  const auto kept = table.select(keep);
  std::vector<double> kept_c;
  std::vector<double> kept_b;
  std::vector<double> kept_center;
  std::vector<double> scale;
  for (auto t : keep) {
    kept_c.push_back(c_hat[t]);
    kept_b.push_back(bs[t]);
    kept_center.push_back(centering[t]);
    scale.push_back(std::sqrt(std::pow(bs[t], static_cast<double>(m))) / c_hat[t]);
  }
  rep.statistic = sup_statistic(kept, kept_c, kept_b, m, r, kept_center);

  TestOutcome out;
  out.draws = bootstrap_sup_draws(kept, scale, plan);
  rep.critical_value = quantile(out.draws, 1.0 - alpha);
  rep.p_value = p_value(out.draws, rep.statistic);
  rep.reject = rep.statistic > rep.critical_value;

  for (double b : grid.bandwidths) {
    if (static_cast<double>(n) * std::pow(b, 1.5 * static_cast<double>(m)) < 1.0) {
      rep.warnings.push_back("bandwidth " + std::to_string(b) + " violates n * b^(3m/2) >= 1");
    }
  }
  out.report = std::move(rep);
  return out;
}

inline TestReport run_test(const Sample& sample, Method method, const ThetaGrid& grid, const MultiplierDrawPlan& plan,
                           double alpha, const TestOptions& options = {}) {
  return run_test_detailed(sample, method, grid, plan, alpha, options).report;
}

// Sup over (theta, b) in design points x bandwidth_set.
inline TestReport run_test_uniform_bandwidth(const Sample& sample, Method method,
                                             const std::vector<std::vector<double>>& design_points,
                                             std::vector<double> bandwidth_set, const MultiplierDrawPlan& plan,
                                             double alpha, const TestOptions& options = {},
                                             std::vector<double> y_thresholds = {}) {
  if (bandwidth_set.empty()) throw InvalidParameter("bandwidth set is empty");
  std::sort(bandwidth_set.begin(), bandwidth_set.end());
  ThetaGrid grid{design_points, std::move(bandwidth_set), std::move(y_thresholds)};
  return run_test(sample, method, grid, plan, alpha, options);
}

}  // namespace ujack
