#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "ujack/ustat.hpp"

namespace {

using ujack::ArgList;
using ujack::SymmetricKernel;

SymmetricKernel product_kernel(std::size_t r) {
  return {r, [r](ArgList a) {
            double p = 1.0;
            for (std::size_t k = 0; k < r; ++k) p *= a[k]->v[0];
            return p;
          },
          "prod"};
}

SymmetricKernel constant_kernel(std::size_t r, double c) {
  return {r, [c](ArgList) { return c; }, "const"};
}

ujack::LocalKernelSpec gsv_spec(double x, double b) {
  return ujack::make_local_spec(ujack::gsv_base_kernel(), ujack::epanechnikov(), {x}, b);
}

TEST(UStatistic, ConstantKernel) {
  const auto s = oracle::scalars({0.3, 1.2, -4, 5, 6});
  EXPECT_EQ(ujack::u_statistic_exact(s, constant_kernel(3, 1.0)), 1.0);
}

TEST(UStatistic, PairProductHandValue) {
  const auto s = oracle::scalars({1, 2, 3, 4});
  EXPECT_NEAR(ujack::u_statistic_exact(s, product_kernel(2)), 35.0 / 6.0, 1e-15);
}

TEST(UStatistic, TripleProductMatchesBruteForce) {
  const auto s = oracle::scalars({1, 1, 2, 3, 5});
  const auto h = product_kernel(3);
  double brute = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j)
      for (int k = j + 1; k < 5; ++k) brute += s[i].v[0] * s[j].v[0] * s[k].v[0];
  brute /= 10.0;
  EXPECT_NEAR(ujack::u_statistic_exact(s, h), brute, 1e-13);
  EXPECT_NEAR(ujack::u_statistic_exact(s, h), oracle::u_statistic(s, 3, h.eval), 1e-13);
}

TEST(UStatistic, TooSmall) {
  const auto s = oracle::scalars({1, 2});
  EXPECT_THROW(ujack::u_statistic_exact(s, product_kernel(3)), ujack::SampleTooSmall);
}

TEST(UStatistic, InvariantUnderSampleShuffle) {
  const auto s = oracle::regression(40, 3, [](double) { return 0.0; }, 1.0);
  auto obs = s.observations();
  ujack::PhiloxStream rng(5, ujack::Stream::kOracle, 0);
  for (std::size_t i = obs.size() - 1; i > 0; --i) std::swap(obs[i], obs[rng.below(i + 1)]);
  const ujack::Sample shuffled(obs);
  const SymmetricKernel h{2, [](ArgList a) { return std::sin(a[0]->v[1] * a[1]->v[1]) + a[0]->v[0] + a[1]->v[0]; }, "h"};
  const double u1 = ujack::u_statistic_exact(s, h);
  const double u2 = ujack::u_statistic_exact(shuffled, h);
  EXPECT_LE(std::abs(u1 - u2), 1e-12 * (1 + std::abs(u1)));
}

TEST(PrunedUStatistic, FarDesignPointIsZero) {
  const auto s = oracle::regression(50, 1, [](double x) { return x; }, 0.1);
  EXPECT_EQ(ujack::u_statistic_pruned(s, gsv_spec(5.0, 0.1)), 0.0);
}

TEST(PrunedUStatistic, MatchesExactOnComposedKernel) {
  const auto s = oracle::regression(200, 2, [](double x) { return -x; }, 0.5);
  for (double x : {0.1, 0.5, 0.93}) {
    const auto spec = gsv_spec(x, 0.15);
    const double pruned = ujack::u_statistic_pruned(s, spec);
    const double exact = ujack::u_statistic_exact(s, spec.composed());
    EXPECT_LE(std::abs(pruned - exact), 1e-12 * std::abs(exact)) << x;
    EXPECT_NE(exact, 0.0);
  }
}

TEST(PrunedUStatistic, WideBandwidthIsANoOp) {
  const auto s = oracle::regression(60, 3, [](double x) { return x * x; }, 0.2);
  const auto spec = ujack::make_local_spec(ujack::gsv_base_kernel(), ujack::uniform_box(1), {0.5}, 2.0);
  EXPECT_EQ(ujack::u_statistic_pruned(s, spec), ujack::u_statistic_exact(s, spec.composed()));
}

TEST(PrunedUStatistic, RandomInstancesIncludingSimplexKernel) {
  for (std::uint64_t t = 0; t < 20; ++t) {
    ujack::PhiloxStream rng(t, ujack::Stream::kOracle, 1);
    const std::size_t n = 10 + rng.below(40);
    const auto s = oracle::regression(n, t, [](double x) { return std::sin(3 * x); }, 0.3);
    const double x = rng.uniform();
    const double b = 0.05 + 0.5 * rng.uniform();
    const auto base = t % 2 ? ujack::gsv_base_kernel() : ujack::aw_base_kernel(ujack::SimplexMode::kRaw);
    const auto spec = ujack::make_local_spec(base, ujack::epanechnikov(), {x}, b);
    const double pruned = ujack::u_statistic_pruned(s, spec);
    const double exact = ujack::u_statistic_exact(s, spec.composed());
    EXPECT_LE(std::abs(pruned - exact), 1e-12 * std::max(std::abs(exact), 1e-300)) << t;
  }
}

TEST(JackknifeTable, PairProductHandValues) {
  const auto s = oracle::scalars({1, 2, 3, 4});
  const auto table = ujack::jackknife_table(s, std::vector<SymmetricKernel>{product_kernel(2)});
  const double expected[] = {3.0, 16.0 / 3.0, 7.0, 8.0};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(table.g(i, 0), expected[i], 1e-14);
  EXPECT_NEAR(table.u(0), 35.0 / 6.0, 1e-14);
  double mean = 0;
  for (std::size_t i = 0; i < 4; ++i) mean += table.g(i, 0) / 4;
  EXPECT_NEAR(mean, 35.0 / 6.0, 1e-14);
}

TEST(JackknifeTable, ConstantKernel) {
  const auto s = oracle::scalars({1, 2, 3, 4, 9});
  const auto table = ujack::jackknife_table(s, std::vector<SymmetricKernel>{constant_kernel(3, 2.5)});
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(table.g(i, 0), 2.5);
  EXPECT_EQ(table.u(0), 2.5);
}

TEST(JackknifeTable, RequiresOneMoreThanOrder) {
  const auto s = oracle::scalars({1, 2, 3});
  EXPECT_THROW(ujack::jackknife_table(s, std::vector<SymmetricKernel>{product_kernel(3)}), ujack::SampleTooSmall);
}

TEST(JackknifeTable, GsvMatchesLeaveOneOutBruteForce) {
  const auto s = oracle::regression(30, 4, [](double x) { return x; }, 0.3);
  std::vector<ujack::LocalKernelSpec> specs{gsv_spec(0.3, 0.3), gsv_spec(0.7, 0.2)};
  const auto table = ujack::jackknife_table(s, specs);
  for (std::size_t t = 0; t < specs.size(); ++t) {
    const auto h = specs[t].composed();
    for (std::size_t i = 0; i < s.size(); ++i) {
      EXPECT_NEAR(table.g(i, t), oracle::leave_one_out(s, i, 2, h.eval), 1e-13);
    }
    // r = 2 closed form: g[i] = (n-1)^{-1} sum_{j != i} h(D_i, D_j)
    for (std::size_t i = 0; i < s.size(); ++i) {
      double direct = 0;
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (j == i) continue;
        const ujack::Observation* args[] = {&s[i], &s[j]};
        direct += h(args);
      }
      EXPECT_NEAR(table.g(i, t), direct / 29.0, 1e-13);
    }
  }
}

TEST(JackknifeTable, SimplexKernelMatchesBruteForce) {
  const auto s = oracle::regression(14, 6, [](double x) { return x * x; }, 0.05);
  const auto spec = ujack::make_local_spec(ujack::aw_base_kernel(ujack::SimplexMode::kRaw), ujack::epanechnikov(),
                                           {0.5}, 0.4);
  const auto table = ujack::jackknife_table(s, std::vector<ujack::LocalKernelSpec>{spec});
  const auto h = spec.composed();
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_NEAR(table.g(i, 0), oracle::leave_one_out(s, i, 3, h.eval), 1e-12);
  }
  EXPECT_NEAR(table.u(0), oracle::u_statistic(s, 3, h.eval), 1e-12);
}

TEST(JackknifeTable, PrunedEqualsFullEnumeration) {
  const auto s = oracle::regression(45, 7, [](double x) { return 0.0 * x; }, 1.0);
  std::vector<ujack::LocalKernelSpec> specs{gsv_spec(0.2, 0.1), gsv_spec(0.5, 0.3)};
  std::vector<SymmetricKernel> composed{specs[0].composed(), specs[1].composed()};
  const auto pruned = ujack::jackknife_table(s, specs);
  const auto full = ujack::jackknife_table(s, composed);
  for (std::size_t t = 0; t < 2; ++t) {
    EXPECT_LE(std::abs(pruned.u(t) - full.u(t)), 1e-12 * std::abs(full.u(t)));
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(pruned.g(i, t), full.g(i, t), 1e-13);
  }
}

TEST(JackknifeTable, AveragingIdentityHolds) {
  for (std::uint64_t t = 0; t < 10; ++t) {
    const auto s = oracle::regression(20 + 4 * t, t, [](double x) { return x; }, 0.5);
    std::vector<ujack::LocalKernelSpec> specs;
    for (double x : {0.1, 0.4, 0.8}) specs.push_back(gsv_spec(x, 0.25));
    const auto table = ujack::jackknife_table(s, specs);
    for (std::size_t k = 0; k < table.thetas(); ++k) {
      double mean = 0;
      for (std::size_t i = 0; i < table.n(); ++i) mean += table.g(i, k);
      mean /= static_cast<double>(table.n());
      EXPECT_LE(std::abs(mean - table.u(k)), 1e-12 * (1 + std::abs(table.u(k))));
    }
  }
}

TEST(JackknifeTable, IndependentOfThreadCount) {
  const auto s = oracle::regression(80, 8, [](double x) { return x; }, 0.5);
  std::vector<ujack::LocalKernelSpec> specs;
  for (int k = 0; k < 9; ++k) specs.push_back(gsv_spec(0.1 * k + 0.1, 0.2));
  ujack::set_thread_count(1);
  const auto a = ujack::jackknife_table(s, specs);
  ujack::set_thread_count(4);
  const auto b = ujack::jackknife_table(s, specs);
  ujack::set_thread_count(0);
  for (std::size_t t = 0; t < a.thetas(); ++t) {
    EXPECT_EQ(a.u(t), b.u(t));
    for (std::size_t i = 0; i < a.n(); ++i) EXPECT_EQ(a.g(i, t), b.g(i, t));
  }
}

TEST(IncompleteUStatistic, ConstantKernelAndDeterminism) {
  const auto s = oracle::scalars({1, 2, 3, 4, 5, 6});
  EXPECT_EQ(ujack::u_statistic_incomplete(s, constant_kernel(2, 1.0), 17, 3), 1.0);
  EXPECT_EQ(ujack::u_statistic_incomplete(s, product_kernel(2), 1000, 9),
            ujack::u_statistic_incomplete(s, product_kernel(2), 1000, 9));
  EXPECT_THROW(ujack::u_statistic_incomplete(s, product_kernel(2), 0, 9), ujack::InvalidParameter);
}

TEST(IncompleteUStatistic, UnbiasedWithinThreeStandardErrors) {
  const auto s = oracle::scalars({0.5, 1.5, 2, 3, 4.5, 7});
  const auto h = product_kernel(2);
  const double exact = ujack::u_statistic_exact(s, h);
  double mean_sq = 0;
  int pairs = 0;
  for (int i = 0; i < 6; ++i)
    for (int j = i + 1; j < 6; ++j, ++pairs) mean_sq += std::pow(s[i].v[0] * s[j].v[0], 2);
  const double sd = std::sqrt(mean_sq / pairs - exact * exact);
  const std::size_t N = 100000;
  const double est = ujack::u_statistic_incomplete(s, h, N, 21);
  EXPECT_LE(std::abs(est - exact), 3 * sd / std::sqrt(static_cast<double>(N)));
}

TEST(IncompleteJackknife, SmallWindowsEnumerateExactly) {
  const auto s = oracle::regression(25, 9, [](double x) { return x * x; }, 0.05);
  const auto spec = ujack::make_local_spec(ujack::aw_base_kernel(ujack::SimplexMode::kRaw), ujack::epanechnikov(),
                                           {0.5}, 0.2);
  const auto complete = ujack::jackknife_table(s, std::vector<ujack::LocalKernelSpec>{spec});
  const auto incomplete = ujack::jackknife_table_incomplete(s, std::vector<ujack::LocalKernelSpec>{spec}, 100000, 1);
  for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(incomplete.g(i, 0), complete.g(i, 0), 1e-13);
  EXPECT_NEAR(incomplete.u(0), complete.u(0), 1e-13);
}

TEST(IncompleteJackknife, SampledTableSatisfiesAveragingIdentity) {
  const auto s = oracle::regression(60, 10, [](double x) { return x * x; }, 0.05);
  const auto spec = ujack::make_local_spec(ujack::aw_base_kernel(ujack::SimplexMode::kSign), ujack::epanechnikov(),
                                           {0.5}, 0.4);
  const auto table = ujack::jackknife_table_incomplete(s, std::vector<ujack::LocalKernelSpec>{spec}, 50, 2);
  double mean = 0;
  for (std::size_t i = 0; i < s.size(); ++i) mean += table.g(i, 0);
  EXPECT_NEAR(mean / 60, table.u(0), 1e-12 * (1 + std::abs(table.u(0))));
  const auto again = ujack::jackknife_table_incomplete(s, std::vector<ujack::LocalKernelSpec>{spec}, 50, 2);
  EXPECT_EQ(again.u(0), table.u(0));
}

}  // namespace
