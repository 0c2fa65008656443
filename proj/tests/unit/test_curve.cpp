#include <gtest/gtest.h>

#include <cmath>

#include "auditlab/auditlab.hpp"

using namespace auditlab;

namespace {

struct Sample {
  std::vector<double> y, g;
};

// Normal outcomes per group clipped to [0, 100].
Sample two_groups(std::uint64_t seed, int per_group, double m0, double s0, double m1, double s1) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  Sample s;
  for (int grp = 0; grp <= 1; ++grp)
    for (int i = 0; i < per_group; ++i) {
      const double v = grp ? m1 + s1 * z(rng) : m0 + s0 * z(rng);
      s.y.push_back(std::clamp(v, 0.0, 100.0));
      s.g.push_back(grp);
    }
  return s;
}

}  // namespace

TEST(Curve, IdenticalSamplesGiveZeroEverywhere) {
  Sample s;
  for (double v : {10.0, 20.0, 35.0, 50.0, 80.0})
    for (int grp = 0; grp <= 1; ++grp) {
      s.y.push_back(v);
      s.g.push_back(grp);
    }
  const auto c = cdf_difference_curve(s.y, s.g, unit_grid(0, 100));
  for (const auto& p : c.points) EXPECT_NEAR(p.coef, 0.0, 1e-12);
  EXPECT_TRUE(c.crossings.empty());
}

TEST(Curve, BelowAndAboveSupportAreDegenerate) {
  const auto s = two_groups(1, 200, 50, 5, 55, 5);
  const auto c = cdf_difference_curve(s.y, s.g, {-1.0, 150.0});
  for (const auto& p : c.points) {
    EXPECT_EQ(p.coef, 0.0);
    EXPECT_FALSE(p.ci_low);
  }
}

TEST(Curve, CoefficientIsTheProportionDifference) {
  const auto s = two_groups(2, 700, 40, 20, 45, 10);
  const auto grid = unit_grid(0, 100, 2.5);
  const auto c = cdf_difference_curve(s.y, s.g, grid);
  ASSERT_EQ(c.points.size(), grid.size());
  for (const auto& p : c.points) {
    double above[2] = {0, 0}, count[2] = {0, 0};
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const int grp = static_cast<int>(s.g[i]);
      count[grp] += 1;
      above[grp] += s.y[i] > p.x;
    }
    EXPECT_NEAR(p.coef, above[1] / count[1] - above[0] / count[0], 1e-12) << "x=" << p.x;
    if (p.ci_low) {
      EXPECT_LE(*p.ci_low, p.coef);
      EXPECT_GE(*p.ci_high, p.coef);
    }
  }
}

TEST(Curve, CrossingDetectedAtConstructedPoint) {
  // Equal medians at 25 with different spreads: the survival curves cross there.
  const auto s = two_groups(3, 5000, 25, 8, 25, 16);
  const auto c = cdf_difference_curve(s.y, s.g, unit_grid(0, 100));
  ASSERT_FALSE(c.crossings.empty());
  double nearest = 1e9;
  for (double x : c.crossings)
    if (std::abs(x - 25.0) < std::abs(nearest - 25.0)) nearest = x;
  EXPECT_NEAR(nearest, 25.0, 5.0);
}

TEST(Curve, FindCrossingsInterpolates) {
  std::vector<CurvePoint> pts(4);
  const double xs[] = {0, 1, 2, 3}, cs[] = {0.2, 0.1, -0.3, 0.0};
  for (int i = 0; i < 4; ++i) {
    pts[static_cast<std::size_t>(i)].x = xs[i];
    pts[static_cast<std::size_t>(i)].coef = cs[i];
  }
  const auto x = find_crossings(pts);
  ASSERT_EQ(x.size(), 1u);
  EXPECT_NEAR(x[0], 1.25, 1e-12);
}

TEST(Curve, InputsValidated) {
  const std::vector<double> y = {1, 2, 3}, g_bad = {0, 1, 2}, g_one = {1, 1, 1}, g_short = {0, 1};
  EXPECT_THROW(cdf_difference_curve(y, g_bad, {1.0}), Error);
  EXPECT_THROW(cdf_difference_curve(y, g_one, {1.0}), Error);
  EXPECT_THROW(cdf_difference_curve(y, g_short, {1.0}), Error);
  EXPECT_THROW(unit_grid(0, 10, 0), Error);
}
