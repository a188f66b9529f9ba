#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rdl/statistics.hpp"

namespace {

TEST(Wilson, KnownInterval) {
  // 10 successes in 100: centre (p + z^2/2n) / (1 + z^2/n), half width z sqrt(p(1-p)/n + z^2/4n^2) / (1 + z^2/n).
  const double z = rdl::kWilsonZ95, n = 100, p = 0.1;
  const double denom = 1 + z * z / n;
  const double centre = (p + z * z / (2 * n)) / denom;
  const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
  const auto w = rdl::wilson(10, 100);
  EXPECT_DOUBLE_EQ(w.estimate, 0.1);
  EXPECT_NEAR(w.lower, centre - half, 1e-14);
  EXPECT_NEAR(w.upper, centre + half, 1e-14);
}

TEST(Wilson, EdgesStayInUnitInterval) {
  for (int events : {0, 1, 50, 99, 100}) {
    const auto w = rdl::wilson(events, 100);
    EXPECT_GE(w.lower, 0.0);
    EXPECT_LE(w.upper, 1.0);
    EXPECT_LE(w.lower, w.estimate);
    EXPECT_GE(w.upper, w.estimate);
  }
  EXPECT_EQ(rdl::wilson(0, 100).lower, 0.0);
  EXPECT_EQ(rdl::wilson(100, 100).upper, 1.0);
}

TEST(Wilson, Overlap) {
  EXPECT_TRUE(rdl::wilson(10, 100).overlaps(rdl::wilson(14, 100)));
  EXPECT_FALSE(rdl::wilson(5, 1000).overlaps(rdl::wilson(500, 1000)));
}

TEST(Fit, ExactLine) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
  const auto fit = rdl::linear_fit(x, y);
  EXPECT_NEAR(fit.slope, 2.0, 1e-14);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-14);
  EXPECT_NEAR(fit.slope_stderr, 0.0, 1e-12);
  EXPECT_EQ(fit.points, 4);
}

TEST(Fit, NoisyLineStandardError) {
  const std::vector<double> x{0, 1, 2, 3}, y{0, 1.1, 1.9, 3.2};
  const auto fit = rdl::linear_fit(x, y);
  // Closed form for these points.
  EXPECT_NEAR(fit.slope, 1.04, 1e-12);
  EXPECT_NEAR(fit.intercept, -0.01, 1e-12);
  double sse = 0;
  for (int i = 0; i < 4; ++i) sse += std::pow(y[i] - (1.04 * x[i] - 0.01), 2);
  EXPECT_NEAR(fit.slope_stderr, std::sqrt(sse / 2.0 / 5.0), 1e-12);
  EXPECT_LT(fit.r_squared, 1.0);
  EXPECT_GT(fit.r_squared, 0.98);
}

TEST(Fit, WeightsPullTowardHeavyPoints) {
  const std::vector<double> x{0, 1, 2}, y{0, 1, 5};
  const std::vector<double> even{1, 1, 1}, light_last{1, 1, 1e-9};
  EXPECT_NEAR(rdl::weighted_fit(x, y, even).slope, rdl::linear_fit(x, y).slope, 1e-12);
  EXPECT_NEAR(rdl::weighted_fit(x, y, light_last).slope, 1.0, 1e-6);
}

}  // namespace
