#include "rdl/oracle.hpp"

#include <cmath>
#include <numbers>

#include "rdl/error.hpp"

namespace rdl {

namespace {

template <class F>
double bisect(const F& f, double lo, double hi) {
  const bool negative_lo = f(lo) < 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((f(mid) < 0.0) == negative_lo) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SeparableLineRoot separable_line_ground_state(double width, double height, double sigma) {
  if (!(width > 0.0) || !(height > 0.0 && height < width)) {
    throw Error(ErrorCode::kInvalidModel, "line height must lie strictly inside (0, d)");
  }
  const double upper = height, lower = width - height;
  const double threshold = width / (upper * lower);
  SeparableLineRoot out;
  if (sigma == threshold) return out;
  if (sigma < threshold) {
    // k cot(k x) falls monotonically from 1/x to -inf on (0, pi/x).
    auto g = [&](double k) { return k / std::tan(k * upper) + k / std::tan(k * lower) - sigma; };
    const double k_max = std::numbers::pi / std::max(upper, lower);
    out.k = bisect(g, 1e-14 * k_max, k_max * (1.0 - 1e-15));
    out.energy = out.k * out.k;
  } else {
    auto g = [&](double kappa) {
      return kappa / std::tanh(kappa * upper) + kappa / std::tanh(kappa * lower) - sigma;
    };
    out.k = bisect(g, 1e-14, 0.5 * sigma);
    out.energy = -out.k * out.k;
  }
  return out;
}

}  // namespace rdl
