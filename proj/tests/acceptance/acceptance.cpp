// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>

#include "oracles.hpp"
#include "ujack/ujack.hpp"

#ifndef UJACK_CLI_PATH
#error "UJACK_CLI_PATH must name the ujack executable"
#endif

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

ujack::LocalKernelSpec random_spec(ujack::PhiloxStream& rng, ujack::Method method) {
  const double x = 0.1 + 0.8 * rng.uniform();
  const double b = 0.15 + 0.45 * rng.uniform();
  ujack::SymmetricKernel base;
  switch (method) {
    case ujack::Method::kGsv: base = ujack::gsv_base_kernel(); break;
    case ujack::Method::kLlw: base = ujack::llw_base_kernel(rng.normal() * 0.5); break;
    case ujack::Method::kAwSign: base = ujack::aw_base_kernel(ujack::SimplexMode::kSign); break;
    case ujack::Method::kAwRaw: base = ujack::aw_base_kernel(ujack::SimplexMode::kRaw); break;
  }
  const auto smoothing = rng.below(2) ? ujack::epanechnikov() : ujack::uniform_box();
  return ujack::make_local_spec(base, smoothing, {x}, b);
}

const std::array<ujack::Method, 4> kMethods{ujack::Method::kGsv, ujack::Method::kLlw, ujack::Method::kAwSign,
                                            ujack::Method::kAwRaw};

Outcome hoeffding_identity(const ujack::OracleSuiteResult& suite, double secs) {
  const bool ok = suite.instances.size() == 20 && suite.max_decomposition_residual <= 1e-10 && secs < 10.0;
  return {ok, fmt2("20 instances, max residual %.3g, suite time %.2f s", suite.max_decomposition_residual, secs)};
}

Outcome averaging_identity() {
  ujack::PhiloxStream rng(2024, ujack::Stream::kOracle, 3);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto method = kMethods[k % 4];
    const bool aw = method == ujack::Method::kAwSign || method == ujack::Method::kAwRaw;
    const std::size_t n = aw ? 10 + rng.below(51) : 5 + rng.below(56);
    const auto s = oracle::regression(n, 1000 + k, [&](double x) { return std::sin(4 * x) * (k % 3); }, 0.3);
    std::vector<ujack::LocalKernelSpec> specs;
    const std::size_t thetas = 1 + rng.below(5);
    for (std::size_t t = 0; t < thetas; ++t) specs.push_back(random_spec(rng, method));
    const auto table = ujack::jackknife_table(s, specs);
    for (std::size_t t = 0; t < table.thetas(); ++t) {
      long double mean = 0;
      for (std::size_t i = 0; i < n; ++i) mean += table.g(i, t);
      mean /= static_cast<long double>(n);
      const double err = std::abs(static_cast<double>(mean) - table.u(t)) / (1 + std::abs(table.u(t)));
      worst = std::max(worst, err);
    }
  }
  return {worst <= 1e-12, fmt("50 tables, max |mean g - u| / (1 + |u|) = %.3g", worst)};
}

Outcome covariance_identity() {
  const auto s = oracle::regression(120, 31, [](double x) { return x * x; }, 0.2);
  std::vector<ujack::LocalKernelSpec> specs;
  for (int t = 0; t < 8; ++t) {
    specs.push_back(ujack::make_local_spec(ujack::gsv_base_kernel(), ujack::epanechnikov(), {0.1 + 0.1 * t}, 0.3));
  }
  const auto table = ujack::jackknife_table(s, specs);
  const ujack::CenteredTable centered(table);
  const std::size_t M = 100000;
  ujack::PhiloxStream pick(31, ujack::Stream::kOracle, 4);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int k = 0; k < 10; ++k) pairs.emplace_back(pick.below(8), pick.below(8));
  std::vector<double> cross(pairs.size(), 0.0);
  for (std::size_t d = 0; d < M; ++d) {
    const auto draw = centered.apply(ujack::multipliers(77, d, table.n()));
    for (std::size_t k = 0; k < pairs.size(); ++k) cross[k] += draw[pairs[k].first] * draw[pairs[k].second];
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto [a, b] = pairs[k];
    const double c = ujack::conditional_covariance(table, a, b);
    const double se = std::sqrt((ujack::conditional_covariance(table, a, a) * ujack::conditional_covariance(table, b, b) +
                                 c * c) / static_cast<double>(M));
    worst = std::max(worst, std::abs(cross[k] / static_cast<double>(M) - c) / se);
  }
  return {worst <= 5.0, fmt("10 pairs over 1e5 draws, max deviation %.2f standard errors", worst)};
}

Outcome pruned_vs_exact() {
  ujack::PhiloxStream rng(99, ujack::Stream::kOracle, 5);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto method = kMethods[k % 4];
    const bool aw = method == ujack::Method::kAwSign || method == ujack::Method::kAwRaw;
    const std::size_t n = aw ? 8 + rng.below(40) : 8 + rng.below(150);
    const auto s = oracle::regression(n, 500 + k, [](double x) { return x; }, 0.5);
    const auto spec = random_spec(rng, method);
    const double pruned = ujack::u_statistic_pruned(s, spec);
    const double exact = ujack::u_statistic_exact(s, spec.composed());
    const double scale = std::max(std::abs(exact), std::abs(pruned));
    if (scale > 0) worst = std::max(worst, std::abs(pruned - exact) / scale);
  }
  return {worst <= 1e-12, fmt("50 instances, max relative difference %.3g", worst)};
}

std::string rate_text(const ujack::SimResult& r) {
  char buf[200];
  std::snprintf(buf, sizeof buf, "%s: rate(0.05)=%.4f rate(0.10)=%.4f failed=%zu",
                ujack::error_kind_name(r.config.error).c_str(), r.rates[0], r.rates[1], r.failed);
  return buf;
}

Outcome size_reproduction(const std::vector<ujack::SimResult>& studies) {
  bool ok = true;
  std::string detail;
  for (const auto& r : studies) {
    ok = ok && r.rates[0] >= 0.01 && r.rates[0] <= 0.09 && r.rates[1] >= 0.04 && r.rates[1] <= 0.13;
    if (!detail.empty()) detail += "; ";
    detail += rate_text(r);
  }
  return {ok, detail};
}

Outcome p_value_uniformity(const std::vector<ujack::SimResult>& studies) {
  bool ok = true;
  std::string detail;
  for (const auto& r : studies) {
    std::vector<double> p;
    for (double v : r.p_values) {
      if (!std::isnan(v)) p.push_back(v);
    }
    const double d = ujack::ks_uniform_distance(p);
    const double pv = ujack::ks_p_value(d, p.size());
    ok = ok && pv >= 0.01;
    if (!detail.empty()) detail += "; ";
    detail += ujack::error_kind_name(r.config.error) + fmt2(": KS D=%.4f p=%.4f", d, pv);
  }
  return {ok, detail};
}

Outcome uniform_bandwidth() {
  const auto s = oracle::regression(100, 41, [](double x) { return -0.3 * x; }, 0.2);
  const auto grid = ujack::ThetaGrid::equidistant(0.05, 0.95, 19, 1, {0.3});
  const ujack::MultiplierDrawPlan plan{500, 41};
  const auto single = ujack::run_test(s, ujack::Method::kGsv, grid, plan, 0.05);
  const auto singleton =
      ujack::run_test_uniform_bandwidth(s, ujack::Method::kGsv, grid.design_points, {0.3}, plan, 0.05);
  auto other = grid;
  other.bandwidths = {0.2};
  const auto second = ujack::run_test(s, ujack::Method::kGsv, other, plan, 0.05);
  const auto both =
      ujack::run_test_uniform_bandwidth(s, ujack::Method::kGsv, grid.design_points, {0.3, 0.2}, plan, 0.05);
  const double diff = std::abs(both.statistic - std::max(single.statistic, second.statistic));
  const bool same = single == singleton;
  return {same && diff <= 1e-12,
          std::string("singleton report ") + (same ? "identical" : "differs") + fmt("; |S(b1,b2) - max| = %.3g", diff)};
}

std::string capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  status = ::pclose(pipe);
  return out;
}

Outcome cli_determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / ("ujack_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto data = (dir / "data.csv").string();
  const auto cfg = (dir / "sim.cfg").string();
  {
    const auto s = ujack::synthesize_null_regression(120, ujack::GaussianErrors{0.1}, 17);
    std::ofstream f(data);
    f << "x,y\n";
    char line[80];
    for (const auto& o : s) {
      std::snprintf(line, sizeof line, "%.17g,%.17g\n", o.x[0], o.v[1]);
      f << line;
    }
    std::ofstream c(cfg);
    c << "n=60\nerror=rademacher:0.1\nreps=24\nboot=200\nseed=5\n";
  }
  const std::string cli = UJACK_CLI_PATH;
  const std::string test = cli + " test --method gsv --data " + data +
                           " --x-cols x --y-col y --bandwidth-set 0.25,0.4 --boot 500 --seed 3 --two-sided";
  const std::string sim = cli + " simulate --config " + cfg;
  bool ok = true;
  std::size_t bytes = 0;
  for (const auto& base : {test, sim}) {
    int s1 = 0, s2 = 0, s3 = 0;
    const auto a = capture(base + " --threads 1 2>/dev/null", s1);
    const auto b = capture(base + " --threads 4 2>/dev/null", s2);
    const auto c = capture(base + " --threads 4 2>/dev/null", s3);
    ok = ok && s1 == 0 && s2 == 0 && s3 == 0 && !a.empty() && a == b && b == c;
    bytes += a.size();
  }
  fs::remove_all(dir);
  return {ok, fmt("test and simulate outputs compared across --threads 1/4 (%.0f bytes)", static_cast<double>(bytes))};
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const auto suite = ujack::run_hoeffding_suite(20240601, 20);
  const double suite_secs = seconds_since(t0);

  report(1, "Hoeffding decomposition identity", [&] { return hoeffding_identity(suite, suite_secs); });
  report(2, "Complete degeneracy of projections", [&] {
    return Outcome{suite.max_projection_marginal <= 1e-10,
                   fmt("max one-argument marginal %.3g", suite.max_projection_marginal)};
  });
  report(3, "Jackknife averaging identity", averaging_identity);
  report(4, "Conditional covariance identity", [] {
    const auto start = Clock::now();
    auto o = covariance_identity();
    const double secs = seconds_since(start);
    o.pass = o.pass && secs < 30.0;
    return o;
  });
  report(5, "Pruned vs exact U-statistic", pruned_vs_exact);

  std::vector<ujack::SimResult> studies;
  report(6, "Size at desk scale", [&] {
    for (const ujack::ErrorKind& e : {ujack::ErrorKind{ujack::GaussianErrors{0.1}},
                                      ujack::ErrorKind{ujack::RademacherErrors{0.1}}}) {
      ujack::SimConfig c;
      c.error = e;
      c.seed = 20240601;
      studies.push_back(ujack::run_size_study(c));
    }
    return size_reproduction(studies);
  });
  report(7, "Null p-value uniformity", [&] {
    if (studies.empty()) return Outcome{false, "size study did not run"};
    return p_value_uniformity(studies);
  });
  report(8, "Uniform-in-bandwidth reduction", uniform_bandwidth);
  report(9, "CLI determinism across thread counts", cli_determinism);

  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAILED" : "ALL PASSED", failures);
  return failures ? 1 : 0;
}
