#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "xustat/dist.hpp"

using namespace xu;
using namespace xu::dist;

TEST(HGamma, WorkedValues) {
  EXPECT_NEAR(h_gamma(0.0, 2.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(h_gamma(1.0, 3.0), 2.0, 1e-15);
  EXPECT_NEAR(h_gamma(-0.5, 4.0), 1.0, 1e-15);
}

TEST(HGamma, ContinuousAcrossZero) {
  for (double y : {1.5, 10.0, 1e6}) {
    const double at0 = h_gamma(0.0, y);
    for (double g : {1e-7, -1e-7, 1e-9, -1e-9, 1e-12}) {
      const double l = std::log(y);
      EXPECT_NEAR(h_gamma(g, y), at0 + g * l * l / 2.0 + g * g * l * l * l / 6.0, 1e-13 * (1.0 + at0));
    }
  }
}

TEST(HGamma, RejectsNonPositive) {
  for (double y : {0.0, -1.0}) {
    try {
      h_gamma(0.5, y);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::NonPositiveArgument);
    }
  }
}

TEST(GpQuantile, WorkedValues) {
  EXPECT_NEAR(gp_quantile(0.0, 1.0 - std::exp(-1.0)), 1.0, 1e-14);
  EXPECT_NEAR(gp_quantile(1.0, 0.5), 1.0, 1e-15);
  EXPECT_LE(gp_quantile(-1.0, 1.0 - 1e-16), 1.0);
  EXPECT_NEAR(gp_quantile(-1.0, 1.0 - 1e-12), 1.0, 1e-11);
  EXPECT_THROW(gp_quantile(0.5, 0.0), Error);
  EXPECT_THROW(gp_quantile(0.5, 1.0), Error);
}

TEST(GpQuantile, InvertsCdf) {
  for (double g : {-0.7, -0.2, 0.0, 0.3, 1.2}) {
    for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) {
      const double z = gp_quantile(g, u);
      const double cdf = g == 0.0 ? 1.0 - std::exp(-z) : 1.0 - std::pow(1.0 + g * z, -1.0 / g);
      EXPECT_NEAR(cdf, u, 1e-12);
    }
  }
}

TEST(Quantile, ClosedForms) {
  EXPECT_NEAR(quantile(burr(1.0, 1.0), 0.5), 1.0, 1e-15);
  EXPECT_NEAR(quantile(frechet(1.0), std::exp(-1.0)), 1.0, 1e-15);
  EXPECT_NEAR(quantile(pareto1(), 0.5), 2.0, 1e-15);
  EXPECT_NEAR(quantile(exponential(), 1.0 - std::exp(-2.0)), 2.0, 1e-14);
  EXPECT_FALSE(has_closed_form_quantile(normal()));
  EXPECT_THROW(quantile(normal(), 0.5), Error);
}

TEST(Quantile, MonotoneInU) {
  const std::vector<DistributionSpec> specs = {gp(-0.5), gp(0.0), gp(0.7), pareto1(), frechet(2.0),
                                               burr(2.0, 1.0), burr(0.5, 3.0), exponential()};
  for (const auto& s : specs) {
    double prev = -INFINITY;
    for (int i = 1; i < 2000; ++i) {
      const double q = quantile(s, i / 2000.0);
      EXPECT_GE(q, prev) << s.label();
      prev = q;
    }
  }
}

TEST(DistributionSpec, GroundTruth) {
  EXPECT_DOUBLE_EQ(*burr(2.0, 1.0).true_gamma, 0.5);
  EXPECT_DOUBLE_EQ(*burr(2.0, 1.0).true_rho, -0.5);
  EXPECT_DOUBLE_EQ(*frechet(4.0).true_gamma, 0.25);
  EXPECT_DOUBLE_EQ(*student_t(4.0).true_gamma, 0.25);
  EXPECT_DOUBLE_EQ(*normal().true_gamma, 0.0);
  EXPECT_DOUBLE_EQ(*normal().true_rho, 0.0);
  EXPECT_DOUBLE_EQ(*beta(2.0, 2.0).true_gamma, -0.5);
  EXPECT_FALSE(beta(2.0, 2.0).true_rho.has_value());
  EXPECT_DOUBLE_EQ(*gp(0.3).true_gamma, 0.3);
  const auto b = burr_from_gamma_rho(0.5, -0.5);
  EXPECT_DOUBLE_EQ(b.p1, 2.0);
  EXPECT_DOUBLE_EQ(b.p2, 1.0);
  EXPECT_EQ(b.label(), "Burr(2;1)");
  EXPECT_THROW(burr(-1.0, 1.0), Error);
  EXPECT_THROW(burr_from_gamma_rho(0.5, 0.0), Error);
}

TEST(DistributionSpec, ParseFamilyAndMake) {
  EXPECT_EQ(parse_family("StudentT"), Family::StudentT);
  EXPECT_FALSE(parse_family("Cauchy").has_value());
  EXPECT_EQ(make_spec(Family::Burr, {2.0, 1.0}).label(), burr(2.0, 1.0).label());
  EXPECT_THROW(make_spec(Family::GP, {}), Error);
  EXPECT_THROW(make_spec(Family::Burr, {2.0}), Error);
}

TEST(Rng, DeterministicAndDistinctStreams) {
  RngStream a(42, 3), b(42, 3), c(42, 4);
  const auto x = draw(gp(0.5), 1000, a);
  const auto y = draw(gp(0.5), 1000, b);
  const auto z = draw(gp(0.5), 1000, c);
  EXPECT_EQ(x, y);
  EXPECT_NE(x, z);
  const RngStream root(7, 0);
  EXPECT_EQ(root.substream(5)(), root.substream(5)());
  EXPECT_NE(root.substream(5)(), root.substream(6)());
}

TEST(Rng, UniformOpenInterval) {
  RngStream r(1, 1);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 0.5, 3.0 * std::sqrt(1.0 / 12.0 / n));
}

TEST(Sample, ExponentialMeanCalibrated) {
  // z-scores of the sample mean over 200 independent streams: mean 0 and
  // variance 1 within 99.9% bands (chi-square on 199 df for the variance).
  const int streams = 200;
  const double n = 20000;
  std::vector<double> z;
  for (int s = 0; s < streams; ++s) {
    RngStream r(2, static_cast<std::uint64_t>(s));
    z.push_back((oracle::mean(draw(gp(0.0), 20000, r)) - 1.0) * std::sqrt(n));
  }
  EXPECT_NEAR(oracle::mean(z), 0.0, 3.3 / std::sqrt(streams));
  EXPECT_GT(oracle::sample_variance(z), 0.70);
  EXPECT_LT(oracle::sample_variance(z), 1.35);
}

TEST(Sample, DkwBandForGp) {
  const double eps = std::sqrt(std::log(2.0 / 0.01) / (2.0 * 1e5));
  for (double g : {-0.5, 0.0, 0.5}) {
    RngStream r(3, static_cast<std::uint64_t>(10 + 10 * g));
    auto x = draw(gp(g), 100000, r);
    std::sort(x.begin(), x.end());
    double d = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double z = x[i];
      const double cdf = g == 0.0 ? 1.0 - std::exp(-z) : 1.0 - std::pow(1.0 + g * z, -1.0 / g);
      d = std::max({d, std::fabs(cdf - i / n), std::fabs(cdf - (i + 1) / n)});
    }
    EXPECT_LT(d, eps) << "gamma=" << g;
  }
}

TEST(Sample, ExactSamplersMoments) {
  RngStream r(4, 0);
  const auto nrm = draw(normal(), 200000, r);
  EXPECT_NEAR(oracle::mean(nrm), 0.0, 3.0 / std::sqrt(2e5));
  EXPECT_NEAR(oracle::sample_variance(nrm), 1.0, 3.0 * std::sqrt(2.0 / 2e5));
  const auto bt = draw(beta(2.0, 2.0), 200000, r);
  EXPECT_NEAR(oracle::mean(bt), 0.5, 3.0 * std::sqrt(0.05 / 2e5));
  EXPECT_NEAR(oracle::sample_variance(bt), 0.05, 0.001);
  // Student-t(6): variance nu / (nu - 2) = 1.5.
  const auto t6 = draw(student_t(6.0), 200000, r);
  EXPECT_NEAR(oracle::mean(t6), 0.0, 3.0 * std::sqrt(1.5 / 2e5));
  EXPECT_NEAR(oracle::sample_variance(t6), 1.5, 0.05);
}

TEST(Sample, StudentTTailProbability) {
  // P(T_1 > 1) = 1/4 for the Cauchy case.
  RngStream r(5, 0);
  const auto x = draw(student_t(1.0), 200000, r);
  const double frac = std::count_if(x.begin(), x.end(), [](double v) { return v > 1.0; }) / 2e5;
  EXPECT_NEAR(frac, 0.25, 3.0 * std::sqrt(0.25 * 0.75 / 2e5));
}

TEST(Sample, BurrTailSlope) {
  const auto spec = burr(1.0, 2.0);  // gamma = 0.5, rho = -1
  const double exact = (std::log(quantile(spec, 1.0 - 1e-5)) - std::log(quantile(spec, 1.0 - 1e-3))) / std::log(100.0);
  EXPECT_NEAR(exact, 0.5, 0.05);
  RngStream r(6, 0);
  auto x = draw(spec, 1000000, r);
  std::sort(x.begin(), x.end(), std::greater<>());
  // Empirical U(t) at t = 1e2 and 1e4 from the 1e4-th and 1e2-th largest.
  const double slope = (std::log(x[99]) - std::log(x[9999])) / std::log(100.0);
  EXPECT_NEAR(slope, 0.5, 0.05);
}

TEST(Sample, SortedAndGuarded) {
  RngStream r(7, 0);
  const auto s = sample(frechet(2.0), 500, r);
  EXPECT_TRUE(std::is_sorted(s.values().begin(), s.values().end(), std::greater<>()));
  try {
    sample(gp(0.5), 2, r);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewObservations);
  }
}

TEST(OrderStats, RepresentationMatchesDirectSampling) {
  // KS null band: with reps = 20000 per side the 99.9% two-sample critical
  // value is 1.95 * sqrt(2 / 20000) ~ 0.0195.
  RngStream r(8, 0);
  EXPECT_LT(gp_order_stat_check(0.0, 20, 3, 20000, r).ks_distance, 0.02);
  EXPECT_LT(gp_order_stat_check(0.5, 50, 3, 20000, r).ks_distance, 0.02);
  const auto one = gp_order_stat_check(0.3, 1, 1, 20000, r);
  EXPECT_EQ(one.margin_distance.size(), 1u);
  EXPECT_LT(one.ks_distance, 0.02);
  EXPECT_THROW(gp_order_stat_check(0.3, 2, 3, 10, r), Error);
}

TEST(OrderStats, KsDistanceBasics) {
  EXPECT_EQ(two_sample_ks({1, 2, 3}, {1, 2, 3}), 0.0);
  EXPECT_EQ(two_sample_ks({1, 2}, {3, 4}), 1.0);
}
