#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hawkes_evolve/stats.hpp"

using namespace hawkes_evolve;

// Reference constants below were computed with scipy.stats (kstwobign.sf,
// kstest, ks_2samp) and numpy.quantile.

TEST(Stats, KahanKeepsSmallTerms) {
  stats::KahanSum s;
  s.add(1e16);
  for (int k = 0; k < 1000; ++k) s.add(1.0);
  s.add(-1e16);
  EXPECT_EQ(s.value(), 1000.0);
}

TEST(Stats, Summary) {
  const std::vector<double> xs{1, 2, 4, 7, 11};
  const auto s = stats::summarize(xs);
  EXPECT_EQ(s.n, 5u);
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.variance, 16.5);
  EXPECT_DOUBLE_EQ(s.se, std::sqrt(16.5 / 5));
  EXPECT_EQ(stats::summarize(std::vector<double>{}).n, 0u);
}

TEST(Stats, Quantile) {
  const std::vector<double> xs{11, 2, 7, 1, 4};
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.3), 2.4);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(stats::quantile(xs, 1.0), 11.0);
  EXPECT_THROW(stats::quantile({}, 0.5), DomainError);
  EXPECT_THROW(stats::quantile(xs, 1.5), DomainError);
}

TEST(Stats, VarianceStandardErrorForNormalSamples) {
  // For normal data Var(s^2) ~ 2 sigma^4 / (n - 1).
  std::mt19937_64 gen(3);
  std::normal_distribution<double> z(0.0, 2.0);
  std::vector<double> xs(20000);
  for (auto& x : xs) x = z(gen);
  EXPECT_NEAR(stats::variance_se(xs), std::sqrt(2.0 * 16.0 / 19999.0), 0.05 * std::sqrt(2.0 * 16.0 / 19999.0));
  EXPECT_THROW(stats::variance_se(std::vector<double>{1, 2, 3}), DomainError);
}

TEST(Stats, KolmogorovSurvival) {
  EXPECT_NEAR(stats::kolmogorov_q(1.0), 0.26999967167735456, 1e-14);
  EXPECT_NEAR(stats::kolmogorov_q(0.5), 0.9639452436648751, 1e-14);
  EXPECT_NEAR(stats::kolmogorov_q(1.36), 0.049485876755377876, 1e-14);
  EXPECT_NEAR(stats::kolmogorov_q(2.0), 0.0006709252557796953, 1e-15);
  EXPECT_EQ(stats::kolmogorov_q(0.0), 1.0);
}

TEST(Stats, KsStatistics) {
  const auto one = stats::ks_unit_exponential({0.1, 0.5, 0.9, 1.3, 2.2, 0.05, 0.7, 3.1});
  EXPECT_NEAR(one.statistic, 0.15483741803595957, 1e-14);
  EXPECT_EQ(one.n, 8u);
  const auto two = stats::ks_two_sample({0.1, 0.4, 0.4, 0.9, 1.5}, {0.2, 0.4, 1.0, 1.1});
  EXPECT_NEAR(two.statistic, 0.3, 1e-14);
  EXPECT_THROW(stats::ks_unit_exponential({}), DomainError);
}

TEST(Stats, KsCalibration) {
  // Under the null about 1% of p-values fall below 0.01.
  std::mt19937_64 gen(11);
  std::exponential_distribution<double> e(1.0);
  int rejections = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> xs(200);
    for (auto& x : xs) x = e(gen);
    rejections += stats::ks_unit_exponential(xs).p_value < 0.01;
  }
  EXPECT_LT(rejections, 45);
  std::vector<double> wrong(500);
  for (auto& x : wrong) x = 2.0 * e(gen);
  EXPECT_LT(stats::ks_unit_exponential(wrong).p_value, 1e-6);
}
