#pragma once

// Exact Hoeffding projections under a finitely supported distribution P.
//
//   (P^{r-k} h)(x_1..x_k) = sum over support^{r-k} of h(x_1..x_k, z..) * prod P(z)
//   (pi_k h)(x_1..x_k)    = sum_{A subset {1..k}} (-1)^{k-|A|} (P^{r-|A|} h)(x_A)
//
// Everything is computed by full enumeration, guarded by an explicit budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/kernels.hpp"
#include "ujack/numeric.hpp"
#include "ujack/rng.hpp"
#include "ujack/ustat.hpp"

namespace ujack {

inline constexpr double kEnumerationBudget = 1e7;

struct DiscreteDistribution {
  std::vector<Observation> support;
  std::vector<double> probs;

  void validate() const {
    if (support.empty()) throw InvalidParameter("distribution support is empty");
    if (support.size() != probs.size()) throw DimensionMismatch("support and probabilities differ in length");
    NeumaierSum total;
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidParameter("probabilities must be nonnegative");
      total.add(p);
    }
    if (std::abs(total.value() - 1.0) > 1e-12) throw InvalidParameter("probabilities must sum to one");
  }
  std::size_t size() const { return support.size(); }
};

// Uniform distribution on scalar payloads (x = v = {value}).
inline DiscreteDistribution uniform_on(const std::vector<double>& values) {
  DiscreteDistribution P;
  for (double v : values) P.support.push_back(Observation{{v}, {v}});
  P.probs.assign(values.size(), 1.0 / static_cast<double>(values.size()));
  return P;
}

struct ProjectedKernel {
  std::size_t k = 0;
  std::function<double(ArgList)> eval;
  std::string source;

  double operator()(ArgList args) const { return eval(args); }
  SymmetricKernel as_symmetric() const { return {k, eval, source}; }
};

namespace detail {

inline void check_budget(std::size_t s, std::size_t depth) {
  if (std::pow(static_cast<double>(s), static_cast<double>(depth)) > kEnumerationBudget) {
    throw BudgetExceeded("enumeration of " + std::to_string(s) + "^" + std::to_string(depth) +
                         " support tuples exceeds the budget");
  }
}

// Calls visit(tuple) for every tuple in {0..s-1}^depth, odometer order.
template <typename Visit>
void for_each_tuple(std::size_t s, std::size_t depth, Visit&& visit) {
  std::vector<std::size_t> t(depth, 0);
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(t));
    std::size_t j = 0;
    while (j < depth && t[j] + 1 == s) t[j++] = 0;
    if (j == depth) return;
    ++t[j];
  }
}

}  // namespace detail

inline ProjectedKernel marginalize(const SymmetricKernel& h, const DiscreteDistribution& P, std::size_t k) {
  P.validate();
  const std::size_t r = h.order;
  if (k > r) throw InvalidParameter("marginal arity exceeds kernel order");
  const std::string source = h.label + "|P^" + std::to_string(r - k);
  if (k == r) return {k, h.eval, source};
  detail::check_budget(P.size(), r - k);
  auto dist = std::make_shared<const DiscreteDistribution>(P);
  auto eval = [h, dist, r, k](ArgList a) {
    std::vector<const Observation*> args(r);
    for (std::size_t i = 0; i < k; ++i) args[i] = a[i];
    NeumaierSum sum;
    detail::for_each_tuple(dist->size(), r - k, [&](const std::vector<std::size_t>& t) {
      double w = 1.0;
      for (std::size_t j = 0; j < t.size(); ++j) {
        args[k + j] = &dist->support[t[j]];
        w *= dist->probs[t[j]];
      }
      if (w != 0.0) sum.add(w * h(args));
    });
    return sum.value();
  };
  return {k, std::move(eval), source};
}

inline ProjectedKernel hoeffding_projection(const SymmetricKernel& h, const DiscreteDistribution& P, std::size_t k) {
  const std::size_t r = h.order;
  if (k < 1 || k > r) throw InvalidParameter("projection level must lie in 1..r");
  std::vector<ProjectedKernel> marginals;
  for (std::size_t a = 0; a <= k; ++a) marginals.push_back(marginalize(h, P, a));
  auto eval = [marginals, k](ArgList x) {
    NeumaierSum sum;
    std::vector<const Observation*> sub;
    for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
      sub.clear();
      for (std::size_t i = 0; i < k; ++i) {
        if (mask & (1u << i)) sub.push_back(x[i]);
      }
      const double sgn = ((k - sub.size()) % 2 == 0) ? 1.0 : -1.0;
      sum.add(sgn * marginals[sub.size()](sub));
    }
    return sum.value();
  };
  return {k, std::move(eval), h.label + "|pi_" + std::to_string(k)};
}

struct DegeneracyOrder {
  std::size_t order = 0;  // 0 = non-degenerate
  bool completely_degenerate = false;
};

// Largest k in 1..r-1 with P^{r-k} h == 0 on support^k (within tol).
// The kernel must already be centered: P^r h == 0.
inline DegeneracyOrder degeneracy_order(const SymmetricKernel& h, const DiscreteDistribution& P,
                                        double tol = 1e-10) {
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  const std::size_t r = h.order;
  const double mean = marginalize(h, P, 0)(ArgList{});
  if (std::abs(mean) > tol) throw NotCentered(mean);
  for (std::size_t k = r - 1; k >= 1; --k) {
    detail::check_budget(P.size(), r);
    const auto marginal = marginalize(h, P, k);
    bool vanishes = true;
    std::vector<const Observation*> args(k);
    detail::for_each_tuple(P.size(), k, [&](const std::vector<std::size_t>& t) {
      if (!vanishes) return;
      for (std::size_t j = 0; j < k; ++j) args[j] = &P.support[t[j]];
      if (std::abs(marginal(args)) > tol) vanishes = false;
    });
    if (vanishes) return {k, k == r - 1};
  }
  return {0, r == 1};
}

struct DecompositionReport {
  double lhs = 0.0;  // U_n(h) - P^r h
  double rhs = 0.0;  // sum_k C(r,k) U_n^{(k)}(pi_k h)
  double max_abs_residual = 0.0;
  bool within_tol = false;
};

inline DecompositionReport verify_hoeffding_decomposition(const Sample& sample, const SymmetricKernel& h,
                                                          const DiscreteDistribution& P, double tol = 1e-10) {
  const std::size_t r = h.order;
  DecompositionReport rep;
  rep.lhs = u_statistic_exact(sample, h) - marginalize(h, P, 0)(ArgList{});
  NeumaierSum rhs;
  for (std::size_t k = 1; k <= r; ++k) {
    const auto proj = hoeffding_projection(h, P, k);
    rhs.add(binomial(r, k) * u_statistic_exact(sample, proj.as_symmetric()));
  }
  rep.rhs = rhs.value();
  rep.max_abs_residual = std::abs(rep.lhs - rep.rhs);
  rep.within_tol = rep.max_abs_residual <= tol;
  return rep;
}

// Largest |sum_x P(x) pi_k h(z_1..z_{k-1}, x)| over all fixings z on support points.
inline double max_projection_marginal(const ProjectedKernel& proj, const DiscreteDistribution& P) {
  const std::size_t k = proj.k;
  double worst = 0.0;
  std::vector<const Observation*> args(k);
  detail::check_budget(P.size(), k);
  detail::for_each_tuple(P.size(), k - 1, [&](const std::vector<std::size_t>& t) {
    for (std::size_t j = 0; j + 1 < k; ++j) args[j] = &P.support[t[j]];
    NeumaierSum sum;
    for (std::size_t x = 0; x < P.size(); ++x) {
      args[k - 1] = &P.support[x];
      sum.add(P.probs[x] * proj(args));
    }
    worst = std::max(worst, std::abs(sum.value()));
  });
  return worst;
}

// Random symmetric kernel of order r on scalar payloads: a combination of
// elementary symmetric polynomials, the sum of squares and the maximum.
inline SymmetricKernel random_symmetric_kernel(std::size_t r, PhiloxStream& rng) {
  std::vector<double> c(6);
  for (auto& v : c) v = 2.0 * rng.uniform() - 1.0;
  auto eval = [c, r](ArgList a) {
    std::vector<double> e(r + 1, 0.0);  // elementary symmetric polynomials
    e[0] = 1.0;
    double squares = 0.0;
    double top = a[0]->v[0];
    for (std::size_t i = 0; i < r; ++i) {
      const double z = a[i]->v[0];
      for (std::size_t j = i + 1; j >= 1; --j) e[j] += e[j - 1] * z;
      squares += z * z;
      top = std::max(top, z);
    }
    double value = c[0] + c[4] * squares + c[5] * top;
    for (std::size_t j = 1; j <= std::min<std::size_t>(r, 3); ++j) value += c[j] * e[j];
    return value;
  };
  return {r, std::move(eval), "poly" + std::to_string(r)};
}

struct OracleInstance {
  std::size_t n = 0;
  std::size_t r = 0;
  std::size_t atoms = 0;
  double decomposition_residual = 0.0;
  double max_marginal = 0.0;  // worst one-argument marginal of pi_k, k = 1..r
};

struct OracleSuiteResult {
  std::uint64_t seed = 0;
  std::vector<OracleInstance> instances;
  double max_decomposition_residual = 0.0;
  double max_projection_marginal = 0.0;
};

// Randomized suite: n <= 8, r <= 3, at most 4 atoms.
inline OracleSuiteResult run_hoeffding_suite(std::uint64_t seed, std::size_t count = 20) {
  OracleSuiteResult out;
  out.seed = seed;
  for (std::size_t t = 0; t < count; ++t) {
    PhiloxStream rng(seed, Stream::kOracle, t);
    OracleInstance inst;
    inst.r = 1 + static_cast<std::size_t>(rng.below(3));
    inst.atoms = 1 + static_cast<std::size_t>(rng.below(4));
    inst.n = inst.r + 1 + static_cast<std::size_t>(rng.below(8 - inst.r));

    DiscreteDistribution P;
    double total = 0.0;
    for (std::size_t a = 0; a < inst.atoms; ++a) {
      const double z = std::round(8.0 * (rng.uniform() - 0.5)) / 2.0;
      P.support.push_back(Observation{{z}, {z}});
      P.probs.push_back(0.1 + rng.uniform());
      total += P.probs.back();
    }
    for (auto& p : P.probs) p /= total;
    NeumaierSum check;
    for (double p : P.probs) check.add(p);
    P.probs.back() += 1.0 - check.value();

    std::vector<Observation> obs;
    for (std::size_t i = 0; i < inst.n; ++i) {
      const double z = rng.uniform() < 0.5 ? P.support[rng.below(inst.atoms)].v[0] : 4.0 * rng.uniform() - 2.0;
      obs.push_back(Observation{{z}, {z}});
    }
    const Sample sample(std::move(obs));
    const auto h = random_symmetric_kernel(inst.r, rng);

    inst.decomposition_residual = verify_hoeffding_decomposition(sample, h, P).max_abs_residual;
    for (std::size_t k = 1; k <= inst.r; ++k) {
      inst.max_marginal = std::max(inst.max_marginal, max_projection_marginal(hoeffding_projection(h, P, k), P));
    }
    out.max_decomposition_residual = std::max(out.max_decomposition_residual, inst.decomposition_residual);
    out.max_projection_marginal = std::max(out.max_projection_marginal, inst.max_marginal);
    out.instances.push_back(inst);
  }
  return out;
}

}  // namespace ujack
