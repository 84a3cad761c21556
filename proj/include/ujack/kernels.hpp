#pragma once

// Symmetric U-statistic kernels, compactly supported smoothing kernels and the
// localized kernel h(d_1..d_r) = phi(v_1..v_r) * prod_k L_b(x - x_k).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/sample.hpp"

namespace ujack {

using ArgList = std::span<const Observation* const>;

struct SymmetricKernel {
  std::size_t order = 1;
  std::function<double(ArgList)> eval;
  std::string label;

  double operator()(ArgList args) const { return eval(args); }
};

struct SmoothingKernel {
  std::string label;
  std::size_t dim = 1;
  std::function<double(std::span<const double>)> eval;

  double operator()(std::span<const double> u) const { return eval(u); }

  // L_b(diff) = b^{-m} L(diff / b).
  double scaled(std::span<const double> diff, double b) const {
    std::vector<double> u(diff.begin(), diff.end());
    for (auto& c : u) c /= b;
    return eval(u) / std::pow(b, static_cast<double>(dim));
  }
};

// Product Epanechnikov kernel prod_j 0.75 (1 - u_j^2) on [-1,1]^m.
inline SmoothingKernel epanechnikov(std::size_t m = 1) {
  return {"epanechnikov", m, [](std::span<const double> u) {
            double value = 1.0;
            for (double c : u) {
              if (std::abs(c) > 1.0) return 0.0;
              value *= 0.75 * (1.0 - c * c);
            }
            return value;
          }};
}

// 2^{-m} on [-1,1]^m.
inline SmoothingKernel uniform_box(std::size_t m = 1) {
  const double height = std::ldexp(1.0, -static_cast<int>(m));
  return {"uniform", m, [height](std::span<const double> u) {
            for (double c : u) {
              if (std::abs(c) > 1.0) return 0.0;
            }
            return height;
          }};
}

inline SmoothingKernel make_smoothing_kernel(const std::string& name, std::size_t m) {
  if (name == "epanechnikov") return epanechnikov(m);
  if (name == "uniform") return uniform_box(m);
  throw InvalidParameter("unknown smoothing kernel '" + name + "' (valid: epanechnikov, uniform)");
}

inline int sign(double t) { return (t > 0.0) - (t < 0.0); }

// phi(v_i, v_j) = sign(y_j - y_i) sign(x_i - x_j), payload (x, y).
inline SymmetricKernel gsv_base_kernel() {
  return {2,
          [](ArgList a) {
            const auto& vi = a[0]->v;
            const auto& vj = a[1]->v;
            return static_cast<double>(sign(vj[1] - vi[1]) * sign(vi[0] - vj[0]));
          },
          "gsv"};
}

// phi(v_i, v_j) = {1(y_i <= t) - 1(y_j <= t)} sign(x_i - x_j), payload (x, y).
inline SymmetricKernel llw_base_kernel(double y_threshold) {
  return {2,
          [y_threshold](ArgList a) {
            const auto& vi = a[0]->v;
            const auto& vj = a[1]->v;
            const int ind = static_cast<int>(vi[1] <= y_threshold) - static_cast<int>(vj[1] <= y_threshold);
            return static_cast<double>(ind * sign(vi[0] - vj[0]));
          },
          "llw(y=" + std::to_string(y_threshold) + ")"};
}

struct SimplexMembership {
  std::size_t index = 0;        // 0-based position of the interior point
  std::vector<double> weights;  // barycentric weights of the other points, in order
};

// Finds the unique j such that the other m+1 points are affinely independent
// and points[j] lies strictly inside their simplex (every weight in (tol, 1-tol)).
inline std::optional<SimplexMembership> simplex_membership(std::span<const std::vector<double>> points,
                                                           double tol = 1e-10) {
  if (points.empty()) return std::nullopt;
  const std::size_t m = points.front().size();
  if (points.size() != m + 2) throw DimensionMismatch("simplex membership needs m + 2 points");
  const auto dm = static_cast<Eigen::Index>(m);

  for (std::size_t j = 0; j < points.size(); ++j) {
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (i != j) others.push_back(i);
    }
    const auto& origin = points[others[0]];
    Eigen::MatrixXd diff(dm, dm);
    Eigen::VectorXd rhs(dm);
    for (Eigen::Index r = 0; r < dm; ++r) {
      for (Eigen::Index c = 0; c < dm; ++c) {
        diff(r, c) = points[others[static_cast<std::size_t>(c) + 1]][r] - origin[r];
      }
      rhs(r) = points[j][r] - origin[r];
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (!(svd.singularValues().minCoeff() > tol)) continue;
    const Eigen::VectorXd coef = svd.solve(rhs);

    std::vector<double> weights(m + 1);
    weights[0] = 1.0 - coef.sum();
    for (std::size_t k = 0; k < m; ++k) weights[k + 1] = coef(static_cast<Eigen::Index>(k));
    const bool interior = std::all_of(weights.begin(), weights.end(),
                                      [tol](double a) { return a > tol && a < 1.0 - tol; });
    if (interior) return SimplexMembership{j, std::move(weights)};
  }
  return std::nullopt;
}

enum class SimplexMode { kSign, kRaw };

// Localized simplex kernel of order m+2 on payloads (x_1..x_m, y):
// phi = 1{in D} sign(w) (kSign) or 1{in D} w (kRaw), w = sum_{i != j} a_i y_i - y_j.
// Arguments are put in a canonical order first, so the value is exactly
// invariant under permutations.
inline SymmetricKernel aw_base_kernel(SimplexMode mode, std::size_t m = 1, double tol = 1e-10) {
  auto eval = [mode, m, tol](ArgList a) {
    std::vector<const Observation*> args(a.begin(), a.end());
    std::sort(args.begin(), args.end(), [](const Observation* l, const Observation* r) {
      return std::lexicographical_compare(l->v.begin(), l->v.end(), r->v.begin(), r->v.end());
    });
    std::vector<std::vector<double>> pts;
    pts.reserve(args.size());
    for (const auto* o : args) pts.emplace_back(o->v.begin(), o->v.begin() + static_cast<std::ptrdiff_t>(m));
    const auto member = simplex_membership(pts, tol);
    if (!member) return 0.0;
    double w = -args[member->index]->v[m];
    std::size_t k = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (i == member->index) continue;
      w += member->weights[k++] * args[i]->v[m];
    }
    return mode == SimplexMode::kSign ? static_cast<double>(sign(w)) : w;
  };
  return {m + 2, std::move(eval), mode == SimplexMode::kSign ? "aw-sign" : "aw-raw"};
}

struct LocalKernelSpec {
  SymmetricKernel base;
  SmoothingKernel smoothing;
  std::vector<double> design_point;
  double bandwidth = 1.0;

  std::size_t order() const { return base.order; }

  // |x - x_k|_inf <= b: the support of L_b(x - .).
  bool in_window(const Observation& o) const {
    for (std::size_t j = 0; j < design_point.size(); ++j) {
      if (std::abs(design_point[j] - o.x[j]) > bandwidth) return false;
    }
    return true;
  }

  double eval(ArgList args) const {
    for (const auto* o : args) {
      if (!in_window(*o)) return 0.0;
    }
    double value = base(args);
    std::vector<double> diff(design_point.size());
    for (const auto* o : args) {
      for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = design_point[j] - o->x[j];
      value *= smoothing.scaled(diff, bandwidth);
    }
    return value;
  }

  SymmetricKernel composed() const {
    auto self = *this;
    return {base.order, [self](ArgList a) { return self.eval(a); }, base.label + "@local"};
  }
};

inline LocalKernelSpec make_local_spec(SymmetricKernel base, SmoothingKernel smoothing,
                                       std::vector<double> design_point, double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw InvalidParameter("bandwidth must be positive");
  if (design_point.size() != smoothing.dim) {
    throw DimensionMismatch("design point dimension differs from smoothing kernel dimension");
  }
  return {std::move(base), std::move(smoothing), std::move(design_point), bandwidth};
}

}  // namespace ujack
