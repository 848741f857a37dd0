#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpw/ks.hpp"
#include "mpw/random.hpp"

using namespace mpw;

TEST(Kolmogorov, KnownValues) {
  // 1 - K(lambda) from standard tables
  EXPECT_NEAR(kolmogorov_survival(1.0), 0.26999967, 1e-7);
  EXPECT_NEAR(kolmogorov_survival(1.36), 0.04946, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(1.63), 0.00975, 1e-4);
  EXPECT_NEAR(kolmogorov_survival(0.5), 0.96394, 1e-5);
  EXPECT_EQ(kolmogorov_survival(0.0), 1.0);
  EXPECT_LT(kolmogorov_survival(5.0), 1e-20);
}

TEST(Kolmogorov, ContinuousAcrossSeriesSwitch) {
  EXPECT_NEAR(kolmogorov_survival(1.18 - 1e-9), kolmogorov_survival(1.18 + 1e-9), 1e-7);
}

TEST(KsOneSample, StatisticByHand) {
  std::vector<double> x;
  for (int i = 0; i < 100; ++i) x.push_back((i + 0.5) / 100.0);
  const auto r = ks_one_sample(x, [](double v) { return v; });
  EXPECT_NEAR(r.statistic, 0.005, 1e-12);
  EXPECT_FALSE(r.ties);
  EXPECT_GT(r.p_value, 0.99);
}

TEST(KsOneSample, RequiresMinimumSample) {
  EXPECT_THROW(ks_one_sample(std::vector<double>(50, 0.1), [](double v) { return v; }),
               std::invalid_argument);
}

TEST(KsOneSample, NullCalibration) {
  // rejection rate at 1% under the null stays near 1%
  int rejections = 0;
  const int trials = 2000;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng = RandomStream::derive(21, t);
    std::vector<double> x(200);
    for (auto& v : x) v = rng.uniform();
    rejections += ks_one_sample(x, [](double v) { return std::clamp(v, 0.0, 1.0); }).p_value < 0.01;
  }
  const double rate = double(rejections) / trials;
  EXPECT_NEAR(rate, 0.01, 4 * std::sqrt(0.01 * 0.99 / trials));
}

TEST(KsOneSample, DetectsShift) {
  RandomStream rng(2);
  std::vector<double> x(500);
  for (auto& v : x) v = 0.2 + 0.8 * rng.uniform();
  EXPECT_LT(ks_one_sample(x, [](double v) { return std::clamp(v, 0.0, 1.0); }).p_value, 1e-6);
}

TEST(KsOneSample, TiesUseMidEcdf) {
  // Poisson(3) draws against their own cdf: the mid-ECDF keeps the
  // statistic small instead of the full jump size.
  std::mt19937_64 gen(4);
  std::poisson_distribution<int> pois(3.0);
  std::vector<double> x(5000);
  for (auto& v : x) v = pois(gen);
  auto cdf = [](double v) {
    double s = 0.0, term = std::exp(-3.0);
    for (int k = 0; k <= static_cast<int>(std::floor(v)); ++k) {
      s += term;
      term *= 3.0 / (k + 1);
    }
    return v < 0 ? 0.0 : s;
  };
  const auto r = ks_one_sample(x, cdf);
  EXPECT_TRUE(r.ties);
  EXPECT_LT(r.statistic, 0.12);  // the largest pmf jump is about 0.224
}

TEST(KsTwoSample, NullCalibration) {
  int rejections = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    RandomStream rng = RandomStream::derive(31, t);
    std::vector<double> a(200), b(400);
    for (auto& v : a) v = rng.uniform();
    for (auto& v : b) v = rng.uniform();
    rejections += ks_two_sample(a, b).p_value < 0.01;
  }
  EXPECT_LE(rejections, 10 + 4 * std::sqrt(10.0));
}

TEST(KsTwoSample, StatisticByHand) {
  std::vector<double> a, b;
  for (int i = 0; i < 100; ++i) a.push_back(i);
  for (int i = 0; i < 100; ++i) b.push_back(i + 50);
  const auto r = ks_two_sample(a, b);
  EXPECT_NEAR(r.statistic, 0.5, 1e-12);
  EXPECT_EQ(r.n, 100u);
  EXPECT_EQ(r.n_reference, 100u);
  EXPECT_LT(r.p_value, 1e-8);
}

TEST(KsTwoSample, IdenticalSamples) {
  std::vector<double> a;
  for (int i = 0; i < 150; ++i) a.push_back(i % 7);
  const auto r = ks_two_sample(a, a);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
}
