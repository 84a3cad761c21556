#pragma once

// Jackknife multiplier bootstrap.
//
// Given the jackknife table, the multiplier process is
//   U#(h_theta) = n^{-1/2} sum_i xi_i (g[i][theta] - u[theta]),  xi_i iid N(0,1),
// a centered Gaussian vector (given the data) with covariance
//   C(theta, theta') = n^{-1} sum_i (g[i][theta] - u[theta]) (g[i][theta'] - u[theta']).
// Draw t uses multipliers from the counter-based stream (seed, t).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/numeric.hpp"
#include "ujack/rng.hpp"
#include "ujack/ustat.hpp"

namespace ujack {

struct MultiplierDrawPlan {
  std::size_t draws = 1;  // B
  std::uint64_t seed = 0;
};

struct BootstrapDraws {
  std::vector<double> values;  // sorted ascending
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
};

// xi for draw t: n standard normals from stream (seed, multiplier, t).
inline std::vector<double> multipliers(std::uint64_t seed, std::size_t draw, std::size_t n) {
  PhiloxStream rng(seed, Stream::kMultiplier, draw);
  std::vector<double> xi(n);
  for (auto& x : xi) x = rng.normal();
  return xi;
}

// Table with u subtracted from every column.
class CenteredTable {
 public:
  explicit CenteredTable(const JackknifeTable& table)
      : n_(table.n()), thetas_(table.thetas()), data_(n_ * thetas_) {
    for (std::size_t t = 0; t < thetas_; ++t) {
      const auto col = table.column(t);
      for (std::size_t i = 0; i < n_; ++i) data_[t * n_ + i] = col[i] - table.u(t);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t thetas() const { return thetas_; }
  std::span<const double> column(std::size_t t) const { return {data_.data() + t * n_, n_}; }

  // n^{-1/2} * (centered table)^T xi
  std::vector<double> apply(std::span<const double> xi) const {
    if (xi.size() != n_) throw DimensionMismatch("multiplier vector length differs from n");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_));
    std::vector<double> out(thetas_);
    for (std::size_t t = 0; t < thetas_; ++t) {
      const double* col = data_.data() + t * n_;
      double acc = 0.0;
      for (std::size_t i = 0; i < n_; ++i) acc += xi[i] * col[i];
      out[t] = scale * acc;
    }
    return out;
  }

 private:
  std::size_t n_;
  std::size_t thetas_;
  std::vector<double> data_;
};

inline std::vector<double> multiplier_draw(const JackknifeTable& table, std::span<const double> xi) {
  return CenteredTable(table).apply(xi);
}

// B draws of max_theta scale[theta] * U#(h_theta), sorted.
inline BootstrapDraws bootstrap_sup_draws(const JackknifeTable& table, std::span<const double> scale,
                                          const MultiplierDrawPlan& plan) {
  if (plan.draws == 0) throw InvalidParameter("bootstrap draw count must be at least 1");
  if (scale.size() != table.thetas()) throw DimensionMismatch("scale length differs from theta count");
  if (table.thetas() == 0) throw InvalidParameter("table has no columns");
  for (std::size_t t = 0; t < scale.size(); ++t) {
    if (!(scale[t] > 0.0) || !std::isfinite(scale[t])) throw NonPositiveScale(t);
  }
  const CenteredTable centered(table);
  BootstrapDraws out;
  out.seed = plan.seed;
  out.values.resize(plan.draws);
  parallel_for(plan.draws, [&](std::size_t d) {
    const auto xi = multipliers(plan.seed, d, table.n());
    const auto draw = centered.apply(xi);
    double best = -INFINITY;
    for (std::size_t t = 0; t < draw.size(); ++t) best = std::max(best, scale[t] * draw[t]);
    out.values[d] = best;
  });
  std::sort(out.values.begin(), out.values.end());
  return out;
}

inline double conditional_covariance(const JackknifeTable& table, std::size_t theta, std::size_t theta2) {
  if (theta >= table.thetas() || theta2 >= table.thetas()) throw InvalidParameter("theta index out of range");
  const auto a = table.column(theta);
  const auto b = table.column(theta2);
  const double ua = table.u(theta);
  const double ub = table.u(theta2);
  NeumaierSum sum;
  for (std::size_t i = 0; i < table.n(); ++i) sum.add((a[i] - ua) * (b[i] - ub));
  return sum.value() / static_cast<double>(table.n());
}

// inf{t : F_B(t) >= alpha}: the ceil(alpha * B)-th order statistic. The
// product is nudged down by 1e-9 so that e.g. 0.95 * 500 selects the 475th.
inline double quantile(const BootstrapDraws& draws, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
  if (draws.values.empty()) throw InvalidParameter("no bootstrap draws");
  const double b = static_cast<double>(draws.size());
  auto k = static_cast<std::size_t>(std::ceil(alpha * b - 1e-9));
  k = std::clamp<std::size_t>(k, 1, draws.size());
  return draws.values[k - 1];
}

// (1 + #{draws >= observed}) / (B + 1)
inline double p_value(const BootstrapDraws& draws, double observed) {
  const auto first = std::lower_bound(draws.values.begin(), draws.values.end(), observed);
  const auto count = static_cast<double>(draws.values.end() - first);
  return (1.0 + count) / (static_cast<double>(draws.size()) + 1.0);
}

}  // namespace ujack
