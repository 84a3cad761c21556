#pragma once

// Uniform spatial hash of covariates into boxes of side b. A query returns
// every observation within sup-distance b of a point, i.e. exactly the
// observations on which a kernel with support [-1,1]^m scaled by b is nonzero.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "ujack/sample.hpp"

namespace ujack {

class BucketGrid {
 public:
  BucketGrid(const Sample& sample, double side) : sample_(&sample), side_(side), m_(sample.m()) {
    for (std::size_t i = 0; i < sample.size(); ++i) {
      cells_[key_of(cell_of(sample[i].x))].push_back(i);
    }
  }

  // Indices i (ascending) with |x_i - point|_inf <= side. Scans the cells the
  // box overlaps (the 3^m neighborhood of the point's cell) plus one cell of
  // slack per side against rounding in the cell index.
  std::vector<std::size_t> within(std::span<const double> point) const {
    std::vector<std::int64_t> lo(m_), hi(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      lo[j] = static_cast<std::int64_t>(std::floor((point[j] - side_) / side_)) - 1;
      hi[j] = static_cast<std::int64_t>(std::floor((point[j] + side_) / side_)) + 1;
    }
    std::vector<std::size_t> out;
    std::vector<std::int64_t> cell = lo;
    while (true) {
      if (auto it = cells_.find(key_of(cell)); it != cells_.end()) {
        for (auto i : it->second) {
          if (close_enough((*sample_)[i].x, point)) out.push_back(i);
        }
      }
      std::size_t j = 0;
      while (j < m_ && cell[j] == hi[j]) {
        cell[j] = lo[j];
        ++j;
      }
      if (j == m_) break;
      ++cell[j];
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

 private:
  std::vector<std::int64_t> cell_of(std::span<const double> x) const {
    std::vector<std::int64_t> c(m_);
    for (std::size_t j = 0; j < m_; ++j) c[j] = static_cast<std::int64_t>(std::floor(x[j] / side_));
    return c;
  }

  static std::uint64_t key_of(const std::vector<std::int64_t>& cell) {
    std::uint64_t h = 1469598103934665603ull;
    for (auto c : cell) {
      h ^= static_cast<std::uint64_t>(c) + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
      h *= 1099511628211ull;
    }
    return h;
  }

  bool close_enough(const std::vector<double>& x, std::span<const double> point) const {
    for (std::size_t j = 0; j < m_; ++j) {
      if (std::abs(point[j] - x[j]) > side_) return false;
    }
    return true;
  }

  const Sample* sample_;
  double side_;
  std::size_t m_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace ujack
