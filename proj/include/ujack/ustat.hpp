#pragma once

// Complete, pruned and incomplete U-statistics plus the leave-one-out
// jackknife table g[i][theta] = U^{(r-1)}_{n-1,-i}(delta_{D_i} h_theta).
//
// All tuple sums enumerate unordered r-subsets in lexicographic order with
// compensated accumulation, so every value is a deterministic function of the
// sample order and independent of the thread count.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ujack/bucket_grid.hpp"
#include "ujack/errors.hpp"
#include "ujack/kernels.hpp"
#include "ujack/numeric.hpp"
#include "ujack/rng.hpp"
#include "ujack/sample.hpp"

namespace ujack {

class JackknifeTable {
 public:
  JackknifeTable() = default;
  JackknifeTable(std::size_t n, std::size_t r, std::vector<std::string> labels)
      : n_(n), r_(r), labels_(std::move(labels)), g_(n * labels_.size(), 0.0), u_(labels_.size(), 0.0) {}

  std::size_t n() const { return n_; }
  std::size_t r() const { return r_; }
  std::size_t thetas() const { return u_.size(); }
  const std::vector<std::string>& theta_labels() const { return labels_; }

  double g(std::size_t i, std::size_t theta) const { return g_[theta * n_ + i]; }
  double u(std::size_t theta) const { return u_[theta]; }

  // Leave-one-out values of one theta, contiguous in i.
  std::span<const double> column(std::size_t theta) const {
    return {g_.data() + theta * n_, n_};
  }
  std::span<double> column(std::size_t theta) { return {g_.data() + theta * n_, n_}; }
  void set_u(std::size_t theta, double value) { u_[theta] = value; }

  // Table restricted to the given columns, in the given order.
  JackknifeTable select(std::span<const std::size_t> keep) const {
    std::vector<std::string> labels;
    for (auto t : keep) labels.push_back(labels_[t]);
    JackknifeTable out(n_, r_, std::move(labels));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      auto src = column(keep[k]);
      std::copy(src.begin(), src.end(), out.column(k).begin());
      out.u_[k] = u_[keep[k]];
    }
    return out;
  }

  // Columns negated (g -> -g, u -> -u), labels prefixed with '-'.
  JackknifeTable negated() const {
    JackknifeTable out = *this;
    for (auto& v : out.g_) v = -v;
    for (auto& v : out.u_) v = -v;
    for (auto& l : out.labels_) l = "-" + l;
    return out;
  }

  // Column-wise concatenation; both tables must share n and r.
  static JackknifeTable concat(const JackknifeTable& a, const JackknifeTable& b) {
    if (a.n_ != b.n_ || a.r_ != b.r_) throw DimensionMismatch("cannot concatenate tables");
    JackknifeTable out = a;
    out.labels_.insert(out.labels_.end(), b.labels_.begin(), b.labels_.end());
    out.g_.insert(out.g_.end(), b.g_.begin(), b.g_.end());
    out.u_.insert(out.u_.end(), b.u_.begin(), b.u_.end());
    return out;
  }

 private:
  std::size_t n_ = 0;
  std::size_t r_ = 0;
  std::vector<std::string> labels_;
  std::vector<double> g_;  // column-major: theta-th column holds g[.][theta]
  std::vector<double> u_;
};

namespace detail {

inline void require_order(const Sample& sample, std::size_t r, std::size_t needed) {
  if (r == 0) throw InvalidParameter("kernel order must be at least 1");
  if (sample.size() < needed) throw SampleTooSmall(sample.size(), needed);
}

// Sum of eval over all r-subsets of `pool` (ascending sample indices).
// If rows is nonempty, each term is also added to rows[i] for every member i.
template <typename Eval>
double enumerate_subsets(const Sample& sample, std::span<const std::size_t> pool, std::size_t r,
                         Eval&& eval, std::vector<NeumaierSum>* rows) {
  NeumaierSum total;
  if (pool.size() < r) return 0.0;
  std::vector<const Observation*> args(r);
  for_each_combination(pool.size(), r, [&](const std::vector<std::size_t>& idx) {
    for (std::size_t k = 0; k < r; ++k) args[k] = &sample[pool[idx[k]]];
    const double term = eval(ArgList(args));
    total.add(term);
    if (rows) {
      for (std::size_t k = 0; k < r; ++k) (*rows)[pool[idx[k]]].add(term);
    }
  });
  return total.value();
}

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  return idx;
}

template <typename Eval>
void fill_column(const Sample& sample, std::span<const std::size_t> pool, std::size_t r, Eval&& eval,
                 JackknifeTable& table, std::size_t theta) {
  const std::size_t n = sample.size();
  std::vector<NeumaierSum> rows(n);
  const double total = enumerate_subsets(sample, pool, r, eval, &rows);
  const double loo_count = binomial(n - 1, r - 1);
  auto col = table.column(theta);
  for (std::size_t i = 0; i < n; ++i) col[i] = rows[i].value() / loo_count;
  table.set_u(theta, total / binomial(n, r));
}

}  // namespace detail

// U_n(h) = C(n,r)^{-1} sum over r-subsets.
inline double u_statistic_exact(const Sample& sample, const SymmetricKernel& h) {
  detail::require_order(sample, h.order, h.order);
  const auto pool = detail::all_indices(sample.size());
  return detail::enumerate_subsets(sample, pool, h.order, h.eval, nullptr) /
         binomial(sample.size(), h.order);
}

// Same value as u_statistic_exact(sample, spec.composed()); tuples are only
// enumerated among observations inside the bandwidth box of the design point.
inline double u_statistic_pruned(const Sample& sample, const LocalKernelSpec& spec) {
  detail::require_order(sample, spec.order(), spec.order());
  const BucketGrid grid(sample, spec.bandwidth);
  const auto pool = grid.within(spec.design_point);
  return detail::enumerate_subsets(sample, pool, spec.order(),
                                   [&](ArgList a) { return spec.eval(a); }, nullptr) /
         binomial(sample.size(), spec.order());
}

inline JackknifeTable jackknife_table(const Sample& sample, const std::vector<SymmetricKernel>& kernels) {
  if (kernels.empty()) throw InvalidParameter("no kernels given");
  const std::size_t r = kernels.front().order;
  std::vector<std::string> labels;
  for (const auto& h : kernels) {
    if (h.order != r) throw InvalidParameter("all kernels in a table must share the order");
    labels.push_back(h.label);
  }
  detail::require_order(sample, r, r + 1);
  JackknifeTable table(sample.size(), r, std::move(labels));
  const auto pool = detail::all_indices(sample.size());
  parallel_for(kernels.size(), [&](std::size_t t) {
    detail::fill_column(sample, pool, r, kernels[t].eval, table, t);
  });
  return table;
}

inline std::string local_label(const LocalKernelSpec& spec) {
  std::string s = spec.base.label + "@x=(";
  for (std::size_t j = 0; j < spec.design_point.size(); ++j) {
    s += (j ? "," : "") + std::to_string(spec.design_point[j]);
  }
  return s + "),b=" + std::to_string(spec.bandwidth);
}

namespace detail {

// One bucket grid per distinct bandwidth, shared by all specs using it.
inline std::vector<std::vector<std::size_t>> local_pools(const Sample& sample,
                                                         const std::vector<LocalKernelSpec>& specs) {
  std::vector<std::vector<std::size_t>> pools(specs.size());
  std::vector<double> seen;
  for (const auto& s : specs) {
    if (std::find(seen.begin(), seen.end(), s.bandwidth) == seen.end()) seen.push_back(s.bandwidth);
  }
  for (double b : seen) {
    const BucketGrid grid(sample, b);
    for (std::size_t t = 0; t < specs.size(); ++t) {
      if (specs[t].bandwidth == b) pools[t] = grid.within(specs[t].design_point);
    }
  }
  return pools;
}

inline std::size_t common_order(const std::vector<LocalKernelSpec>& specs) {
  if (specs.empty()) throw InvalidParameter("no kernels given");
  const std::size_t r = specs.front().order();
  for (const auto& s : specs) {
    if (s.order() != r) throw InvalidParameter("all kernels in a table must share the order");
  }
  return r;
}

}  // namespace detail

// Pruned jackknife table: for a local spec, g[i] = 0 exactly outside the
// bandwidth box, and tuples are enumerated among the observations inside it.
inline JackknifeTable jackknife_table(const Sample& sample, const std::vector<LocalKernelSpec>& specs) {
  const std::size_t r = detail::common_order(specs);
  detail::require_order(sample, r, r + 1);
  std::vector<std::string> labels;
  for (const auto& s : specs) labels.push_back(local_label(s));
  JackknifeTable table(sample.size(), r, std::move(labels));
  const auto pools = detail::local_pools(sample, specs);
  parallel_for(specs.size(), [&](std::size_t t) {
    detail::fill_column(sample, pools[t], r, [&](ArgList a) { return specs[t].eval(a); }, table, t);
  });
  return table;
}

namespace detail {

// k distinct positions in [0, pool_size), ascending.
inline void draw_subset(PhiloxStream& rng, std::size_t pool_size, std::size_t k, std::vector<std::size_t>& out) {
  out.clear();
  while (out.size() < k) {
    const auto c = static_cast<std::size_t>(rng.below(pool_size));
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
}

}  // namespace detail

// Average of h over n_terms r-subsets drawn uniformly (with replacement
// across terms). Unbiased for U_n(h).
inline double u_statistic_incomplete(const Sample& sample, const SymmetricKernel& h, std::size_t n_terms,
                                     std::uint64_t seed) {
  detail::require_order(sample, h.order, h.order);
  if (n_terms == 0) throw InvalidParameter("n_terms must be at least 1");
  const std::size_t r = h.order;
  PhiloxStream rng(seed, Stream::kIncomplete, 0);
  std::vector<std::size_t> idx;
  std::vector<const Observation*> args(r);
  NeumaierSum total;
  for (std::size_t t = 0; t < n_terms; ++t) {
    detail::draw_subset(rng, sample.size(), r, idx);
    for (std::size_t k = 0; k < r; ++k) args[k] = &sample[idx[k]];
    total.add(h(args));
  }
  return total.value() / static_cast<double>(n_terms);
}

// Incomplete jackknife table for high-order local kernels. For observation i
// in the window of theta, g[i] averages h(D_i, .) over n_terms random
// (r-1)-subsets of the other in-window observations, rescaled by the share of
// such subsets among all (r-1)-subsets of the n-1 others. If there are at
// most n_terms such subsets they are enumerated exactly. u is set to mean_i g
// so the averaging identity holds by construction.
inline JackknifeTable jackknife_table_incomplete(const Sample& sample, const std::vector<LocalKernelSpec>& specs,
                                                 std::size_t n_terms, std::uint64_t seed) {
  const std::size_t r = detail::common_order(specs);
  detail::require_order(sample, r, r + 1);
  if (n_terms == 0) throw InvalidParameter("n_terms must be at least 1");
  const std::size_t n = sample.size();
  std::vector<std::string> labels;
  for (const auto& s : specs) labels.push_back(local_label(s));
  JackknifeTable table(n, r, std::move(labels));
  const auto pools = detail::local_pools(sample, specs);

  parallel_for(specs.size(), [&](std::size_t t) {
    const auto& pool = pools[t];
    const auto& spec = specs[t];
    auto col = table.column(t);
    const std::size_t s = pool.size();
    if (s >= r) {
      const double share = binomial(s - 1, r - 1) / binomial(n - 1, r - 1);
      std::vector<const Observation*> args(r);
      std::vector<std::size_t> others;
      std::vector<std::size_t> idx;
      for (std::size_t a = 0; a < s; ++a) {
        const std::size_t i = pool[a];
        others.clear();
        for (std::size_t b = 0; b < s; ++b) {
          if (b != a) others.push_back(pool[b]);
        }
        args[0] = &sample[i];
        NeumaierSum sum;
        double count = 0.0;
        if (binomial(s - 1, r - 1) <= static_cast<double>(n_terms)) {
          for_each_combination(others.size(), r - 1, [&](const std::vector<std::size_t>& c) {
            for (std::size_t k = 0; k + 1 < r; ++k) args[k + 1] = &sample[others[c[k]]];
            sum.add(spec.eval(args));
            count += 1.0;
          });
        } else {
          PhiloxStream rng(seed, Stream::kIncomplete, (static_cast<std::uint64_t>(t) << 32) | i);
          for (std::size_t term = 0; term < n_terms; ++term) {
            detail::draw_subset(rng, others.size(), r - 1, idx);
            for (std::size_t k = 0; k + 1 < r; ++k) args[k + 1] = &sample[others[idx[k]]];
            sum.add(spec.eval(args));
          }
          count = static_cast<double>(n_terms);
        }
        col[i] = share * sum.value() / count;
      }
    }
    NeumaierSum mean;
    for (double v : col) mean.add(v);
    table.set_u(t, mean.value() / static_cast<double>(n));
  });
  return table;
}

}  // namespace ujack
