#include "rdl/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "rdl/error.hpp"

namespace rdl {

Proportion wilson(int events, int trials, double z) {
  if (trials <= 0 || events < 0 || events > trials) {
    throw Error(ErrorCode::kInvalidModel, "proportion needs 0 <= events <= trials and trials > 0");
  }
  Proportion p;
  p.events = events;
  p.trials = trials;
  const double n = trials;
  const double phat = events / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = (phat + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
  p.estimate = phat;
  p.lower = std::clamp(centre - half, 0.0, phat);
  p.upper = std::clamp(centre + half, phat, 1.0);
  return p;
}

LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) {
    throw Error(ErrorCode::kInvalidModel, "fit needs at least two matched points");
  }
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
    syy += w[i] * (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error(ErrorCode::kInvalidModel, "fit abscissae are all equal");
  LinearFit fit;
  fit.points = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss_res += w[i] * r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  if (x.size() > 2) {
    fit.slope_stderr = std::sqrt(ss_res / (static_cast<double>(x.size()) - 2.0) / sxx);
  }
  return fit;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> ones(x.size(), 1.0);
  return weighted_fit(x, y, ones);
}

}  // namespace rdl
