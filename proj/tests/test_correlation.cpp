#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "gazepair/correlation.hpp"
#include "oracle.hpp"

using namespace gazepair;

TEST(Pearson, SmallHandExample) {
  const std::vector<double> a{0, 1, 2, 3}, b{1, 3, 2, 5};
  // cov 5.5, var 5 and 8.75
  const double expected = 5.5 / std::sqrt(5.0 * 8.75);
  ASSERT_TRUE(pearson(a, b));
  EXPECT_NEAR(*pearson(a, b), expected, 1e-12);
  EXPECT_NEAR(*pearson(a, b), 0.83152, 1e-5);
}

TEST(Pearson, PerfectAndInverse) {
  const std::vector<double> a{1, 2, 3, 4, 5}, up{10, 20, 30, 40, 50}, down{5, 4, 3, 2, 1};
  EXPECT_DOUBLE_EQ(*pearson(a, up), 1.0);
  EXPECT_DOUBLE_EQ(*pearson(a, down), -1.0);
}

TEST(Pearson, ConstantSeriesHasNoCorrelation) {
  const std::vector<double> flat(10, 0.1), ramp{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_FALSE(pearson(flat, ramp));
  EXPECT_FALSE(pearson(ramp, flat));
  EXPECT_FALSE(pearson(flat, flat));
}

TEST(Pearson, RejectsBadInput) {
  const std::vector<double> a{1, 2, 3}, b{1, 2};
  EXPECT_THROW(pearson(a, b), UsageError);
  const std::vector<double> one{1};
  EXPECT_THROW(pearson(one, one), UsageError);
}

TEST(Pearson, LargeOffsetsKeepPrecision) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n(0, 1);
  std::vector<double> a, b;
  for (int i = 0; i < 30; ++i) {
    const double x = n(rng);
    a.push_back(1e7 + x);
    b.push_back(-3e6 + 2 * x + 0.5 * n(rng));
  }
  EXPECT_NEAR(*pearson(a, b), *oracle::pearson(a, b), 1e-9);
}

TEST(Pearson, MatchesOracleOnRandomSeries) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-400, 400);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 30; ++i) {
      a.push_back(u(rng));
      b.push_back(0.3 * a.back() + u(rng));
    }
    EXPECT_NEAR(*pearson(a, b), *oracle::pearson(a, b), 1e-12);
  }
}

TEST(SlidingPearson, TracksOracleOverLongStreams) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 50);
  SlidingPearson sp(30);
  std::vector<double> a, b;
  for (int i = 0; i < 5000; ++i) {
    const double x = 200 + n(rng) + 40 * std::sin(i * 0.2);
    const double y = 300 + 40 * std::sin(i * 0.2 + 0.3) + n(rng) * 0.2;
    a.push_back(x);
    b.push_back(y);
    sp.push(x, y);
    if (a.size() >= 30) {
      const std::vector<double> wa(a.end() - 30, a.end()), wb(b.end() - 30, b.end());
      ASSERT_TRUE(sp.value());
      ASSERT_NEAR(*sp.value(), *oracle::pearson(wa, wb), 1e-9) << "at " << i;
    }
  }
}

TEST(SlidingPearson, PartialWindowAndClear) {
  SlidingPearson sp(4);
  EXPECT_FALSE(sp.value());
  sp.push(0, 1);
  EXPECT_FALSE(sp.value());
  sp.push(1, 3);
  sp.push(2, 2);
  sp.push(3, 5);
  EXPECT_TRUE(sp.full());
  EXPECT_NEAR(*sp.value(), 0.83152, 1e-5);
  sp.clear();
  EXPECT_EQ(sp.size(), 0u);
  EXPECT_FALSE(sp.value());
}

TEST(SlidingPearson, ConstantTailIsExactlyNoCorrelation) {
  SlidingPearson sp(5);
  for (int i = 0; i < 5; ++i) sp.push(i * 0.1, i);
  ASSERT_TRUE(sp.value());
  for (int i = 0; i < 5; ++i) sp.push(0.7, i);
  EXPECT_FALSE(sp.value());
  sp.push(0.8, 9);
  EXPECT_TRUE(sp.value());
}

TEST(SlidingPearson, RejectsTinyWindow) { EXPECT_THROW(SlidingPearson(1), UsageError); }

TEST(SlidingRampPearson, MatchesOracleAgainstRamp) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10, 10);
  SlidingRampPearson rp(30);
  std::vector<double> xs;
  std::vector<double> ramp;
  for (int i = 0; i < 30; ++i) ramp.push_back(i);
  double x = 180;
  for (int i = 0; i < 3000; ++i) {
    x += u(rng) + (i % 200 < 100 ? 3 : -3);
    xs.push_back(x);
    rp.push(x);
    if (xs.size() >= 30) {
      const std::vector<double> w(xs.end() - 30, xs.end());
      ASSERT_NEAR(*rp.value(), *oracle::pearson(w, ramp), 1e-9);
    }
  }
}

TEST(SlidingRampPearson, LinearAndEasedStrokes) {
  SlidingRampPearson rp(30);
  for (int i = 0; i < 30; ++i) rp.push(90 + 8.0 * i);
  EXPECT_NEAR(*rp.value(), 1.0, 1e-12);

  rp.clear();
  for (int i = 0; i < 30; ++i) {
    const double tau = i / 29.0;
    rp.push(90 + 250 * tau * tau);
  }
  EXPECT_NEAR(*rp.value(), 0.96627, 1e-5);

  rp.clear();
  for (int i = 0; i < 30; ++i) rp.push(42.0);
  EXPECT_FALSE(rp.value());
}

TEST(SlidingPearson, NearlyConstantWindowAfterLargeJump) {
  // A quiet window far from where the running sums were anchored.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  SlidingPearson sp(30);
  SlidingRampPearson rp(30);
  std::vector<double> a, b;
  for (int i = 0; i < 90; ++i) {
    const bool quiet = i >= 45;
    const double va = quiet ? 300.0 + 1e-3 * n(rng) : 10 * n(rng);
    const double vb = quiet ? 20.0 + 1e-3 * n(rng) : 10 * n(rng);
    sp.push(va, vb);
    rp.push(va);
    a.push_back(va);
    b.push_back(vb);
    if (a.size() < 30) continue;
    const std::vector<double> wa(a.end() - 30, a.end()), wb(b.end() - 30, b.end());
    std::vector<double> ramp(30);
    for (int k = 0; k < 30; ++k) ramp[k] = k;
    ASSERT_NEAR(*sp.value(), *oracle::pearson(wa, wb), 1e-9) << "at " << i;
    ASSERT_NEAR(*rp.value(), *oracle::pearson(wa, ramp), 1e-9) << "at " << i;
  }
}
