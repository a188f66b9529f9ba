#pragma once

#include <span>

namespace rdl {

inline constexpr double kWilsonZ95 = 1.959963984540054;

struct Proportion {
  int events = 0;
  int trials = 0;
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 1.0;

  bool overlaps(const Proportion& other) const { return lower <= other.upper && other.lower <= upper; }
};

/// Wilson score interval.
Proportion wilson(int events, int trials, double z = kWilsonZ95);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_stderr = 0.0;
  int points = 0;
};

/// Least squares y = slope * x + intercept.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

/// Weighted least squares; weights are inverse variances.
LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w);

}  // namespace rdl
