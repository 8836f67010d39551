#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "xustat/dist.hpp"
#include "xustat/ustat.hpp"

using namespace xu;
using namespace xu::ustat;

namespace {

// Exact C(n-j, m-3) / C(n, m) * (2(n-j+1)/(m-2) - j) in long double for small n.
long double direct_weight(std::size_t n, std::size_t m, std::size_t j) {
  auto binom = [](std::size_t a, std::size_t b) {
    long double r = 1.0L;
    for (std::size_t i = 1; i <= b; ++i) r = r * static_cast<long double>(a - b + i) / static_cast<long double>(i);
    return r;
  };
  return binom(n - j, m - 3) / binom(n, m) *
         (2.0L * static_cast<long double>(n - j + 1) / static_cast<long double>(m - 2) - static_cast<long double>(j));
}

SortedSample random_sample(dist::RngStream& r, std::size_t n) {
  const double g = -0.5 + 1.5 * r.uniform();
  return dist::sample(dist::gp(g), n, r);
}

std::vector<double> as_vector(const SortedSample& s) { return {s.values().begin(), s.values().end()}; }

}  // namespace

TEST(Weights, SmallWorkedCases) {
  const auto w5 = pickands_weights(5, 3);
  ASSERT_EQ(w5.w.size(), 4u);
  EXPECT_NEAR(std::exp(w5.log_ratio[0]), 0.1, 1e-15);
  const double e5[] = {0.6, 0.3, 0.0, -0.3};
  for (std::size_t j = 2; j <= 5; ++j) EXPECT_NEAR(w5.weight(j), e5[j - 2], 1e-14);
  const auto w4 = pickands_weights(4, 3);
  const double e4[] = {1.0, 0.25, -0.5};
  for (std::size_t j = 2; j <= 4; ++j) EXPECT_NEAR(w4.weight(j), e4[j - 2], 1e-14);
}

TEST(Weights, MatchDirectBinomials) {
  for (std::size_t n = 3; n <= 40; ++n) {
    for (std::size_t m = 3; m <= n; ++m) {
      const auto w = pickands_weights(n, m);
      const double base = static_cast<double>(m * (m - 1) * (m - 2)) / static_cast<double>(n * (n - 1) * (n - m + 1));
      EXPECT_NEAR(std::exp(w.log_ratio[0]), base, 1e-14 * base);
      for (std::size_t j = 2; j <= w.j_max(); ++j) {
        const double d = static_cast<double>(direct_weight(n, m, j));
        EXPECT_NEAR(w.weight(j), d, 1e-12 * std::max(1e-300, std::fabs(d)) + 1e-15) << n << ' ' << m << ' ' << j;
      }
    }
  }
}

TEST(Weights, ZeroSumIdentity) {
  for (std::size_t n : {10u, 100u, 10000u}) {
    for (std::size_t m : {std::size_t{3}, std::size_t{10}, n / 2, n}) {
      const auto w = pickands_weights(n, m);
      long double s = 0.0L, scale = 0.0L;
      for (std::size_t j = 2; j <= w.j_max(); ++j) {
        ASSERT_TRUE(std::isfinite(w.weight(j)));
        s += static_cast<long double>(w.weight(j)) * static_cast<long double>(j - 1);
        scale += std::fabs(w.weight(j)) * static_cast<long double>(j - 1);
      }
      EXPECT_LT(std::fabs(static_cast<double>(s / scale)), 1e-10) << n << ' ' << m;
    }
  }
}

TEST(Weights, LargeInstanceFinite) {
  const auto w = pickands_weights(10000, 100);
  EXPECT_EQ(w.w.size(), 10000u - 100u + 2u);
  EXPECT_TRUE(std::all_of(w.w.begin(), w.w.end(), [](double v) { return std::isfinite(v); }));
}

TEST(Weights, GuardsBlockSize) {
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{10, 2}, {10, 11}}) {
    try {
      pickands_weights(n, m);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::BlockSizeOutOfRange);
    }
  }
}

TEST(BruteForce, WorkedExamples) {
  const auto s = SortedSample::from_descending({4, 3, 1, 0});
  const auto k = pickands_top_q_kernel();
  const double expect = (std::log(1.0 / 6) + std::log(1.0 / 12) + std::log(9.0 / 4) + std::log(4.0 / 3)) / 4;
  EXPECT_NEAR(expect, -std::log(24.0) / 4.0, 1e-15);
  EXPECT_NEAR(brute_force_ustat(s, 3, k), expect, 1e-14);
  EXPECT_NEAR(brute_force_ustat(s, 4, k), std::log(1.0 / 6.0), 1e-14);
  const auto constant = make_kernel(3, [](std::span<const double>) { return 2.5; });
  dist::RngStream r(1, 0);
  const auto t = random_sample(r, 9);
  for (std::size_t m = 3; m <= 9; ++m) EXPECT_NEAR(brute_force_ustat(t, m, constant), 2.5, 1e-14);
}

TEST(BruteForce, GuardsSize) {
  dist::RngStream r(2, 0);
  const auto big = random_sample(r, 21);
  try {
    brute_force_ustat(big, 5, pickands_top_q_kernel());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InstanceTooLarge);
  }
}

TEST(FastFormula, WorkedExample) {
  const auto s = SortedSample::from_descending({4, 3, 1, 0});
  const double by_hand = 1.0 * std::log(1.0) + 0.25 * (std::log(3.0) + std::log(2.0)) -
                         0.5 * (std::log(4.0) + std::log(3.0) + std::log(1.0));
  EXPECT_NEAR(by_hand, -std::log(24.0) / 4.0, 1e-15);
  EXPECT_NEAR(pickands_ustat(s, 3), -std::log(24.0) / 4.0, 1e-15);
  EXPECT_NEAR(pickands_ustat(s, 4), std::log(1.0 / 6.0), 1e-15);
  EXPECT_NEAR(topq_weighted_ustat(s, 3, pickands_top_q_kernel()), -std::log(24.0) / 4.0, 1e-15);
}

TEST(FastFormula, MatchesSubsetOracle) {
  dist::RngStream root(3, 0);
  const auto kernel = pickands_top_q_kernel();
  for (std::size_t i = 0; i < 200; ++i) {
    auto r = root.substream(i);
    const std::size_t n = 6 + static_cast<std::size_t>(r.uniform() * 7);
    const std::size_t m = 3 + static_cast<std::size_t>(r.uniform() * 4);
    const auto s = random_sample(r, n);
    const double truth = oracle::subset_average(as_vector(s), m);
    EXPECT_NEAR(pickands_ustat(s, m), truth, 1e-10 * (1.0 + std::fabs(truth))) << n << ' ' << m;
    EXPECT_NEAR(topq_weighted_ustat(s, m, kernel), truth, 1e-10 * (1.0 + std::fabs(truth)));
    EXPECT_NEAR(brute_force_ustat(s, m, kernel), truth, 1e-10 * (1.0 + std::fabs(truth)));
  }
}

TEST(FastFormula, MEqualsN) {
  dist::RngStream r(4, 0);
  const auto s = random_sample(r, 50);
  EXPECT_NEAR(pickands_ustat(s, 50), pickands_kernel(s[0], s[1], s[2]), 1e-12);
}

TEST(FastFormula, LocationScaleInvariance) {
  dist::RngStream r(5, 0);
  const auto s = dist::sample(dist::gp(0.3), 300, r);
  for (std::size_t m : {3u, 10u, 100u}) {
    const double base = pickands_ustat(s, m);
    for (double a : {0.01, 100.0}) {
      for (double b : {-50.0, 50.0}) EXPECT_NEAR(pickands_ustat(s.affine(a, b), m), base, 1e-9);
    }
  }
}

TEST(FastFormula, PermutationInvariance) {
  dist::RngStream r(6, 0);
  auto raw = dist::draw(dist::gp(0.2), 200, r);
  const double base = pickands_ustat(sort_sample(raw), 10);
  std::reverse(raw.begin(), raw.end());
  std::rotate(raw.begin(), raw.begin() + 37, raw.end());
  EXPECT_EQ(pickands_ustat(sort_sample(raw), 10), base);
}

TEST(FastFormula, TiesRaiseOnlyWhenTouched) {
  std::vector<double> v;
  for (int i = 0; i < 30; ++i) v.push_back(100.0 - i * (1.0 + 0.01 * i));
  v.push_back(v.back());  // tie at the bottom: ranks 30 and 31
  const auto s = SortedSample::from_descending(v);
  try {
    pickands_ustat(s, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DegenerateSpacing);
  }
  // j_max = n - m + 3 = 31 - 10 + 3 = 24 stays above the tie.
  EXPECT_TRUE(std::isfinite(pickands_ustat(s, 10)));
  const LogSpacingTable table(s, s.n());
  EXPECT_THROW(table.estimate(3), Error);
  EXPECT_NEAR(table.estimate(10), pickands_ustat(s, 10), 1e-12);
}

TEST(FastFormula, GuardsBlockSize) {
  const auto s = SortedSample::from_descending({4, 3, 1, 0});
  EXPECT_THROW(pickands_ustat(s, 2), Error);
  EXPECT_THROW(pickands_ustat(s, 5), Error);
}

TEST(LogSpacing, MatchesNaiveSum) {
  dist::RngStream r(7, 0);
  const auto s = dist::sample(dist::gp(1.0), 500, r);
  for (std::size_t j : {2u, 3u, 33u, 100u, 499u, 500u}) {
    long double naive = 0.0L;
    for (std::size_t i = 1; i < j; ++i) naive += std::log(static_cast<long double>(s[i - 1]) - s[j - 1]);
    EXPECT_NEAR(log_spacing_sum(s.values(), j), static_cast<double>(naive), 1e-12 * std::fabs(static_cast<double>(naive)) + 1e-12);
  }
}

TEST(LogSpacing, TableAgreesWithDirectEvaluation) {
  dist::RngStream r(8, 0);
  const auto s = dist::sample(dist::student_t(3.0), 400, r);
  const LogSpacingTable table(s, s.n());
  for (std::size_t m = 3; m <= 400; m += 17) EXPECT_NEAR(table.estimate(m), pickands_ustat(s, m), 1e-12);
}

TEST(TopQ, TupleWeightsSumToOne) {
  for (auto [n, m] : {std::pair<std::size_t, std::size_t>{10, 3}, {12, 6}, {30, 17}, {8, 8}}) {
    long double total = 0.0L;
    for (std::size_t r = 3; r <= n; ++r) {
      // (r-1 choose 2) tuples end at rank r.
      total += static_cast<long double>((r - 1) * (r - 2) / 2) * topq_tuple_weight(n, m, 3, r);
    }
    EXPECT_NEAR(static_cast<double>(total), 1.0, 1e-12);
  }
}

TEST(TopQ, GuardsSize) {
  dist::RngStream r(9, 0);
  const auto s = random_sample(r, 60);
  EXPECT_THROW(topq_weighted_ustat(s, 5, pickands_top_q_kernel(), 50), Error);
  EXPECT_NO_THROW(topq_weighted_ustat(s, 5, pickands_top_q_kernel(), 60));
}

TEST(Truncation, BoundHolds) {
  dist::RngStream r(10, 0);
  const auto s = dist::sample(dist::gp(0.5), 3000, r);
  for (std::size_t m : {20u, 100u, 500u}) {
    const double exact = pickands_ustat(s, m);
    for (double tol : {1e-6, 1e-10}) {
      const auto t = pickands_ustat_truncated(s, m, tol);
      EXPECT_LE(std::fabs(t.value - exact), t.error_bound + 1e-12);
      EXPECT_LE(t.terms_used, t.terms_total);
    }
    // Zero tolerance stops only where every remaining weight underflows to 0.
    const auto none = pickands_ustat_truncated(s, m, 0.0);
    EXPECT_EQ(none.error_bound, 0.0);
    EXPECT_NEAR(none.value, exact, 1e-12);
  }
  EXPECT_LT(pickands_ustat_truncated(s, 500, 1e-6).terms_used, 3000u / 2);
}

TEST(Smoothing, VarianceNotAboveDisjointBlocks) {
  dist::RngStream root(11, 0);
  std::vector<double> u, d;
  for (std::size_t i = 0; i < 2000; ++i) {
    auto r = root.substream(i);
    const auto raw = dist::draw(dist::gp(0.5), 60, r);
    u.push_back(pickands_ustat(sort_sample(raw), 12));
    d.push_back(disjoint_block_pickands(raw, 12));
  }
  EXPECT_LE(oracle::sample_variance(u), oracle::sample_variance(d));
}

TEST(Smoothing, DisjointBlocksDefinition) {
  const std::vector<double> raw{1, 4, 3, 0, 7, 2};
  const double expect = (pickands_kernel(4, 3, 1) + pickands_kernel(7, 2, 0)) / 2.0;
  EXPECT_NEAR(disjoint_block_pickands(raw, 3), expect, 1e-14);
}

TEST(Overlap, WorkedCases) {
  const auto p = overlap_pmf(4, 2);
  ASSERT_EQ(p.p.size(), 3u);
  EXPECT_NEAR(p.p[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(p.p[1], 4.0 / 6, 1e-15);
  EXPECT_NEAR(p.p[2], 1.0 / 6, 1e-15);
  const auto q = overlap_pmf(100, 10);
  EXPECT_NEAR(q.mean(), 1.0, 1e-10);
  const auto full = overlap_pmf(7, 7);
  EXPECT_NEAR(full.p[7], 1.0, 1e-15);
  for (std::size_t l = 0; l < 7; ++l) EXPECT_NEAR(full.p[l], 0.0, 1e-15);
}

TEST(Overlap, NormalizedWithHypergeometricMean) {
  for (std::size_t n : {10u, 200u, 10000u}) {
    for (std::size_t m : {std::size_t{1}, std::size_t{3}, n / 7 + 1, n / 2, n}) {
      const auto p = overlap_pmf(n, m);
      EXPECT_NEAR(p.total(), 1.0, 1e-12);
      const double mu = static_cast<double>(m) * m / n;
      EXPECT_NEAR(p.mean(), mu, 1e-10 * mu);
    }
  }
  EXPECT_THROW(overlap_pmf(10, 0), Error);
  EXPECT_THROW(overlap_pmf(10, 11), Error);
}

TEST(Unbiasedness, GpSamplesAtFullData) {
  for (double g : {-0.5, 0.0, 0.5}) {
    const dist::RngStream root(12, static_cast<std::uint64_t>(100 + 10 * g));
    std::vector<double> est(500);
    for (std::size_t r = 0; r < est.size(); ++r) {
      auto s = root.substream(r);
      est[r] = pickands_ustat(dist::sample(dist::gp(g), 2000, s), 3);
    }
    const double se = std::sqrt(oracle::sample_variance(est) / est.size());
    EXPECT_NEAR(oracle::mean(est), g, 3.0 * se) << "gamma=" << g;
  }
}
