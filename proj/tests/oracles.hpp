#pragma once

// Reference values computed without the library: closed forms, boost root
// finding and plain adaptive quadrature.

#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>

namespace rdl::oracle {

/// Romberg integration of g over [lo, hi] until successive diagonal entries
/// agree to rel_tol.
inline double romberg(const std::function<double(double)>& g, double lo, double hi, double rel_tol = 1e-13) {
  constexpr int kLevels = 22;
  double r[kLevels][kLevels]{};
  double h = hi - lo;
  r[0][0] = 0.5 * h * (g(lo) + g(hi));
  for (int i = 1; i < kLevels; ++i) {
    h *= 0.5;
    double sum = 0.0;
    for (long k = 1; k < (1L << i); k += 2) sum += g(lo + k * h);
    r[i][0] = 0.5 * r[i - 1][0] + h * sum;
    double pow4 = 1.0;
    for (int j = 1; j <= i; ++j) {
      pow4 *= 4.0;
      r[i][j] = r[i][j - 1] + (r[i][j - 1] - r[i - 1][j - 1]) / (pow4 - 1.0);
    }
    if (i > 4 && std::abs(r[i][i] - r[i - 1][i - 1]) <= rel_tol * std::abs(r[i][i])) return r[i][i];
  }
  return r[kLevels - 1][kLevels - 1];
}

/// int over the circle of (2 / (d L)) sin^2(pi y / d) ds, Dirichlet pair.
inline double lambda1_dirichlet_circle(double d, double cell_length, double cx, double cy, double r, double c) {
  (void)cx;
  const double pi = std::numbers::pi;
  auto g = [&](double theta) {
    const double s = std::sin(pi * (cy + r * std::sin(theta)) / d);
    return s * s * r;
  };
  return c * 2.0 / (d * cell_length) * romberg(g, 0.0, 2.0 * pi);
}

/// d = pi, centre height pi / 2: sin^2(pi/2 + r sin t) = (1 + cos(2 r sin t)) / 2
/// integrates to pi (1 + J0(2r)), so Lambda_1 = 2 r (1 + J0(2r)) / L.
inline double lambda1_dirichlet_pi_bessel(double r, double cell_length) {
  return 2.0 * r * (1.0 + std::cyl_bessel_j(0.0, 2.0 * r)) / cell_length;
}

/// Ground energy of -u'' on (0, d), u(0) = u(d) = 0, with the jump
/// u'(h+) - u'(h-) = -sigma u(h). Solved with boost's TOMS 748 bracketing.
inline double separable_line_energy(double d, double h, double sigma) {
  const double h2 = d - h;
  const double critical = 1.0 / h + 1.0 / h2;
  boost::math::tools::eps_tolerance<double> tol(52);
  std::uintmax_t iters = 500;
  if (sigma <= critical) {
    // k (cot(k h) + cot(k h2)) - sigma is decreasing on (0, pi / max(h, h2)).
    auto f = [&](double k) { return k * (1.0 / std::tan(k * h) + 1.0 / std::tan(k * h2)) - sigma; };
    const double top = std::numbers::pi / std::max(h, h2);
    const auto [a, b] = boost::math::tools::toms748_solve(f, 1e-12 * top, top * (1.0 - 1e-12), tol, iters);
    const double k = 0.5 * (a + b);
    return k * k;
  }
  auto f = [&](double q) { return q * (1.0 / std::tanh(q * h) + 1.0 / std::tanh(q * h2)) - sigma; };
  double top = 1.0;
  while (f(top) < 0.0) top *= 2.0;
  const auto [a, b] = boost::math::tools::toms748_solve(f, 1e-12, top, tol, iters);
  const double q = 0.5 * (a + b);
  return -q * q;
}

/// j-th generalized eigenvalue of the linear-element Dirichlet chain with
/// n intervals of width h: (6 / h^2) (1 - cos t) / (2 + cos t), t = j pi / n.
inline double linear_chain_eigenvalue(int j, int n, double h) {
  const double t = j * std::numbers::pi / n;
  return 6.0 / (h * h) * (1.0 - std::cos(t)) / (2.0 + std::cos(t));
}

}  // namespace rdl::oracle
