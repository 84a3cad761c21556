#pragma once

// Observations D_i = (X_i, V_i) and their ingestion from CSV files.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ujack/errors.hpp"
#include "ujack/rng.hpp"

namespace ujack {

struct Observation {
  std::vector<double> x;  // covariate, length m
  std::vector<double> v;  // payload, length p; regression tests use v = (x, y)

  bool operator==(const Observation&) const = default;
};

// An immutable, validated list of observations sharing m and p.
class Sample {
 public:
  Sample() = default;

  explicit Sample(std::vector<Observation> observations) : obs_(std::move(observations)) {
    if (obs_.size() < 2) throw SampleTooSmall(obs_.size(), 2);
    m_ = obs_.front().x.size();
    p_ = obs_.front().v.size();
    if (m_ == 0 || p_ == 0) throw InvalidParameter("covariate and payload must be nonempty");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
      const auto& o = obs_[i];
      if (o.x.size() != m_ || o.v.size() != p_) {
        throw DimensionMismatch("observation " + std::to_string(i) + " has inconsistent dimensions");
      }
      for (double c : o.x) {
        if (!std::isfinite(c)) throw NonFiniteValue(i, 0);
      }
      for (double c : o.v) {
        if (!std::isfinite(c)) throw NonFiniteValue(i, 0);
      }
    }
  }

  std::size_t size() const { return obs_.size(); }
  std::size_t m() const { return m_; }
  std::size_t p() const { return p_; }
  const Observation& operator[](std::size_t i) const { return obs_[i]; }
  const std::vector<Observation>& observations() const { return obs_; }
  auto begin() const { return obs_.begin(); }
  auto end() const { return obs_.end(); }

  bool operator==(const Sample&) const = default;

 private:
  std::vector<Observation> obs_;
  std::size_t m_ = 0;
  std::size_t p_ = 0;
};

// Regression-style sample: covariates xs[i], payload (xs[i], ys[i]).
inline Sample make_regression_sample(const std::vector<std::vector<double>>& xs,
                                     const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DimensionMismatch("x and y lengths differ");
  std::vector<Observation> obs;
  obs.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    Observation o{xs[i], xs[i]};
    o.v.push_back(ys[i]);
    obs.push_back(std::move(o));
  }
  return Sample(std::move(obs));
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Rows and columns in error reports are 1-based data rows / columns.
inline double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string cell = trim(raw);
  if (cell.empty()) throw ParseError(row, col, cell);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(cell, &used);
  } catch (const std::out_of_range&) {
    throw NonFiniteValue(row, col);
  } catch (const std::exception&) {
    throw ParseError(row, col, cell);
  }
  if (used != cell.size()) throw ParseError(row, col, cell);
  if (!std::isfinite(value)) throw NonFiniteValue(row, col);
  return value;
}

}  // namespace detail

inline Sample load_csv(const std::string& path, const std::vector<std::string>& covariate_columns,
                       const std::vector<std::string>& payload_columns) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) throw EmptyFile(path);
  auto header = detail::split_csv_line(line);
  for (auto& h : header) h = detail::trim(h);

  auto locate = [&](const std::string& name) {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw MissingColumn(name);
  };
  std::vector<std::size_t> xcols;
  std::vector<std::size_t> vcols;
  for (const auto& name : covariate_columns) xcols.push_back(locate(name));
  for (const auto& name : payload_columns) vcols.push_back(locate(name));
  if (xcols.empty() || vcols.empty()) {
    throw InvalidParameter("need at least one covariate and one payload column");
  }

  std::vector<Observation> obs;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    ++row;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(row, cells.size() + 1, "row has " + std::to_string(cells.size()) + " cells");
    }
    std::vector<double> parsed(cells.size());
    std::vector<bool> done(cells.size(), false);
    auto get = [&](std::size_t c) {
      if (!done[c]) {
        parsed[c] = detail::parse_cell(cells[c], row, c + 1);
        done[c] = true;
      }
      return parsed[c];
    };
    Observation o;
    for (auto c : xcols) o.x.push_back(get(c));
    for (auto c : vcols) o.v.push_back(get(c));
    obs.push_back(std::move(o));
  }
  if (obs.empty()) throw EmptyFile(path);
  return Sample(std::move(obs));
}

// Writes covariates as x1..xm and payload as v1..vp with 17 significant
// digits, so load_csv(path, {x..}, {v..}) reproduces the sample bit for bit.
inline void write_csv(const Sample& sample, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  for (std::size_t j = 0; j < sample.m(); ++j) out << (j ? "," : "") << "x" << j + 1;
  for (std::size_t j = 0; j < sample.p(); ++j) out << ",v" << j + 1;
  out << '\n';
  char buf[32];
  for (const auto& o : sample) {
    bool first = true;
    for (double c : o.x) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << (first ? "" : ",") << buf;
      first = false;
    }
    for (double c : o.v) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      out << ',' << buf;
    }
    out << '\n';
  }
}

struct GaussianErrors {
  double sd;
};
struct RademacherErrors {
  double scale;
};
using ErrorKind = std::variant<GaussianErrors, RademacherErrors>;

// X ~ Uniform[0,1], Y = error (zero regression function). Payload (x, y).
inline Sample synthesize_null_regression(std::size_t n, const ErrorKind& errors, std::uint64_t seed) {
  if (n < 2) throw InvalidParameter("n must be at least 2");
  const double spread = std::visit([](auto e) {
    if constexpr (std::is_same_v<decltype(e), GaussianErrors>) {
      return e.sd;
    } else {
      return e.scale;
    }
  }, errors);
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw InvalidParameter("error scale must be positive");
  }
  std::vector<Observation> obs(n);
  for (std::size_t i = 0; i < n; ++i) {
    PhiloxStream rng(seed, Stream::kSynthesis, i);
    const double x = rng.uniform();
    double y = 0.0;
    if (std::holds_alternative<GaussianErrors>(errors)) {
      y = spread * rng.normal();
    } else {
      y = (rng.next_u32() & 1u) ? spread : -spread;
    }
    obs[i] = Observation{{x}, {x, y}};
  }
  return Sample(std::move(obs));
}

}  // namespace ujack
