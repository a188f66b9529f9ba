#include "rdl/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "rdl/error.hpp"

namespace rdl {

std::string_view to_string(BoundaryKind kind) {
  return kind == BoundaryKind::kDirichlet ? "dirichlet" : "neumann";
}

BoundaryKind boundary_kind_from_string(std::string_view name) {
  if (name == "dirichlet" || name == "Dirichlet" || name == "D") return BoundaryKind::kDirichlet;
  if (name == "neumann" || name == "Neumann" || name == "N") return BoundaryKind::kNeumann;
  throw Error(ErrorCode::kInvalidModel, "unknown boundary condition '" + std::string(name) + "'");
}

void LayerGeometry::validate() const {
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw Error(ErrorCode::kInvalidModel, "strip width d must be positive");
  }
  if (!(cell_length > 0.0) || !std::isfinite(cell_length)) {
    throw Error(ErrorCode::kInvalidModel, "cell length |e1| must be positive");
  }
}

// ---------------------------------------------------------------------------
// Manifold

Manifold::Manifold(ManifoldKind kind, double param_length, Curve point, Curve tangent,
                   bool oracle_only)
    : kind_(kind),
      param_length_(param_length),
      point_(std::move(point)),
      tangent_(std::move(tangent)),
      oracle_only_(oracle_only) {}

Manifold Manifold::circle(Point2 center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::kInvalidModel, "circle radius must be positive");
  Manifold m(
      ManifoldKind::kCircle, 2.0 * std::numbers::pi,
      [center, radius](double t) {
        return Point2{center.x + radius * std::cos(t), center.y + radius * std::sin(t)};
      },
      [radius](double t) { return Point2{-radius * std::sin(t), radius * std::cos(t)}; }, false);
  m.center_ = center;
  m.radius_ = radius;
  return m;
}

Manifold Manifold::separable_line(double height, double cell_length) {
  Manifold m(
      ManifoldKind::kSeparableLine, cell_length,
      [height](double s) { return Point2{s, height}; },
      [](double) { return Point2{1.0, 0.0}; }, true);
  m.center_ = Point2{0.5 * cell_length, height};
  return m;
}

Point2 Manifold::normal(double y) const {
  const Point2 t = tangent_(y);
  const double n = std::hypot(t.x, t.y);
  return Point2{t.y / n, -t.x / n};
}

double Manifold::arclength_weight(double y) const {
  const Point2 t = tangent_(y);
  return std::hypot(t.x, t.y);
}

double Manifold::length(int nodes) const {
  const double h = param_length_ / nodes;
  double sum = 0.0;
  for (int i = 0; i < nodes; ++i) sum += arclength_weight((i + 0.5) * h);
  return sum * h;
}

void Manifold::validate_in_cell(const LayerGeometry& geom) const {
  if (oracle_only_) {
    if (kind_ == ManifoldKind::kSeparableLine && !(height() > 0.0 && height() < geom.width)) {
      throw Error(ErrorCode::kInvalidModel, "separable line height must lie in (0, d)");
    }
    return;
  }
  if (kind_ == ManifoldKind::kCircle) {
    const bool inside = center_.x - radius_ > 0.0 && center_.x + radius_ < geom.cell_length &&
                        center_.y - radius_ > 0.0 && center_.y + radius_ < geom.width;
    if (!inside) {
      throw Error(ErrorCode::kInvalidModel,
                  "circle must keep a positive distance from the cell boundary");
    }
    return;
  }
  // Generic curve: sample and require the image to stay strictly inside.
  const int samples = 2048;
  for (int i = 0; i < samples; ++i) {
    const Point2 p = point_(param_length_ * i / samples);
    if (!(p.x > 0.0 && p.x < geom.cell_length && p.y > 0.0 && p.y < geom.width)) {
      throw Error(ErrorCode::kInvalidModel, "curve leaves the open cell");
    }
  }
}

// ---------------------------------------------------------------------------
// Coupling

CouplingFunction CouplingFunction::constant(double value, double t0) {
  CouplingFunction f(CouplingKind::kConstant, t0);
  f.constant_ = value;
  return f;
}

CouplingFunction CouplingFunction::profile(Profile g, double t0) {
  CouplingFunction f(CouplingKind::kProfile, t0);
  f.coefficients_.push_back(std::move(g));
  return f;
}

CouplingFunction CouplingFunction::polynomial_in_t(std::vector<Profile> coefficients, double t0) {
  CouplingFunction f(CouplingKind::kPolynomialInT, t0);
  f.coefficients_ = std::move(coefficients);
  return f;
}

double CouplingFunction::operator()(double y, double t) const {
  switch (kind_) {
    case CouplingKind::kConstant: return constant_;
    case CouplingKind::kProfile: return coefficients_.front()(y);
    case CouplingKind::kPolynomialInT: {
      double acc = 0.0;
      for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) acc = acc * t + (*it)(y);
      return acc;
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Disorder

Disorder::Disorder(std::vector<double> nodes, std::vector<double> values, std::uint64_t seed)
    : nodes_(std::move(nodes)), values_(std::move(values)), seed_(seed) {
  if (nodes_.size() < 2 || nodes_.size() != values_.size()) {
    throw Error(ErrorCode::kInvalidModel, "density table needs matching nodes and values");
  }
  const double a = nodes_.front();
  if (!(a >= -1.0 && a < 1.0) || nodes_.back() != 1.0) {
    throw Error(ErrorCode::kInvalidModel, "density support must be [a, 1] with -1 <= a < 1");
  }
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    if (!(nodes_[i + 1] > nodes_[i])) {
      throw Error(ErrorCode::kInvalidModel, "density nodes must be strictly increasing");
    }
  }
  for (double v : values_) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidModel, "density values must be finite and non-negative");
    }
  }
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    mass += 0.5 * (values_[i] + values_[i + 1]) * (nodes_[i + 1] - nodes_[i]);
  }
  if (!(mass > 0.0)) throw Error(ErrorCode::kInvalidModel, "density has zero mass");
  for (double& v : values_) v /= mass;

  cdf_.assign(nodes_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    cdf_[i + 1] = cdf_[i] + 0.5 * (values_[i] + values_[i + 1]) * (nodes_[i + 1] - nodes_[i]);
  }
  // Remove the rounding residue so that the last node maps to exactly 1.
  const double total = cdf_.back();
  for (double& c : cdf_) c /= total;
  for (double& v : values_) v /= total;

  // On a piecewise-linear density: int |h'| is the total variation of the
  // node values (the edge jumps to zero outside the support included).
  double variation = values_.front() + values_.back();
  for (std::size_t i = 0; i + 1 < values_.size(); ++i) variation += std::abs(values_[i + 1] - values_[i]);
  w11_norm_ = integral() + variation;

  inverse_table_.resize(kInverseTableIntervals + 1);
  for (int j = 0; j <= kInverseTableIntervals; ++j) {
    inverse_table_[j] = exact_quantile(static_cast<double>(j) / kInverseTableIntervals);
  }
}

Disorder Disorder::smoothed_uniform(double a, std::uint64_t seed, double ramp_fraction) {
  const double w = ramp_fraction * (1.0 - a);
  return Disorder({a, a + w, 1.0 - w, 1.0}, {0.0, 1.0, 1.0, 0.0}, seed);
}

Disorder Disorder::triangular(double a, std::uint64_t seed) {
  return Disorder({a, 0.5 * (a + 1.0), 1.0}, {0.0, 1.0, 0.0}, seed);
}

Disorder Disorder::with_seed(std::uint64_t seed) const {
  Disorder copy = *this;
  copy.seed_ = seed;
  return copy;
}

double Disorder::density(double t) const {
  if (t < nodes_.front() || t > nodes_.back()) return 0.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  if (it == nodes_.end()) return values_.back();
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double s = (t - nodes_[i]) / (nodes_[i + 1] - nodes_[i]);
  return (1.0 - s) * values_[i] + s * values_[i + 1];
}

double Disorder::cdf(double t) const {
  if (t <= nodes_.front()) return 0.0;
  if (t >= nodes_.back()) return 1.0;
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
  const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
  const double s = t - nodes_[i];
  const double slope = (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
  return cdf_[i] + values_[i] * s + 0.5 * slope * s * s;
}

double Disorder::exact_quantile(double u) const {
  if (u <= 0.0) {
    // Leftmost point of the support carrying mass.
    std::size_t i = 0;
    while (i + 1 < nodes_.size() && cdf_[i + 1] <= 0.0) ++i;
    return nodes_[i];
  }
  if (u >= 1.0) return nodes_.back();
  // Left node on ties: first segment whose upper cdf reaches u.
  const auto it = std::lower_bound(cdf_.begin() + 1, cdf_.end(), u);
  const std::size_t i = static_cast<std::size_t>(it - cdf_.begin()) - 1;
  const double r = u - cdf_[i];
  const double h0 = values_[i];
  const double slope = (values_[i + 1] - values_[i]) / (nodes_[i + 1] - nodes_[i]);
  const double disc = std::max(0.0, h0 * h0 + 2.0 * slope * r);
  const double denom = h0 + std::sqrt(disc);
  const double s = denom > 0.0 ? 2.0 * r / denom : 0.0;
  return std::min(nodes_[i] + s, nodes_[i + 1]);
}

double Disorder::inverse_cdf(double u) const {
  const double scaled = std::clamp(u, 0.0, 1.0) * kInverseTableIntervals;
  const int j = std::min(static_cast<int>(scaled), kInverseTableIntervals - 1);
  const double frac = scaled - j;
  return inverse_table_[j] + frac * (inverse_table_[j + 1] - inverse_table_[j]);
}

double Disorder::integral() const {
  double mass = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    mass += 0.5 * (values_[i] + values_[i + 1]) * (nodes_[i + 1] - nodes_[i]);
  }
  return mass;
}

namespace {

// Exact int t*h(t) over one linear segment (Simpson is exact for cubics).
double first_moment(double t0, double t1, double h0, double h1) {
  return (t1 - t0) / 6.0 * (t0 * (2.0 * h0 + h1) + t1 * (h0 + 2.0 * h1));
}

}  // namespace

double Disorder::mean() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    m += first_moment(nodes_[i], nodes_[i + 1], values_[i], values_[i + 1]);
  }
  return m;
}

double Disorder::mean_abs() const {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
    const double t0 = nodes_[i], t1 = nodes_[i + 1];
    const double h0 = values_[i], h1 = values_[i + 1];
    if (t0 < 0.0 && t1 > 0.0) {
      const double hz = h0 + (h1 - h0) * (-t0) / (t1 - t0);
      m -= first_moment(t0, 0.0, h0, hz);
      m += first_moment(0.0, t1, hz, h1);
    } else {
      const double part = first_moment(t0, t1, h0, h1);
      m += t1 <= 0.0 ? -part : part;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// Transverse mode

double TransverseMode::psi0(double y) const {
  switch (shape) {
    case ModeShape::kSine: return amplitude * std::sin(wavenumber * y);
    case ModeShape::kCosine: return amplitude * std::cos(wavenumber * y);
    case ModeShape::kConstant: return amplitude;
  }
  return 0.0;
}

double TransverseMode::psi0_second_derivative(double y) const {
  return -wavenumber * wavenumber * psi0(y);
}

TransverseMode transverse_mode(const LayerGeometry& geom) {
  geom.validate();
  const double d = geom.width;
  const double pi = std::numbers::pi;
  TransverseMode mode;
  const double sine_amplitude = std::sqrt(2.0 / (d * geom.cell_volume_prime()));
  if (geom.bottom == BoundaryKind::kDirichlet && geom.top == BoundaryKind::kDirichlet) {
    mode.wavenumber = pi / d;
    mode.shape = ModeShape::kSine;
    mode.amplitude = sine_amplitude;
  } else if (geom.bottom == BoundaryKind::kNeumann && geom.top == BoundaryKind::kNeumann) {
    mode.wavenumber = 0.0;
    mode.shape = ModeShape::kConstant;
    mode.amplitude = 1.0 / std::sqrt(d * geom.cell_volume_prime());
  } else {
    // Quarter wave: vanishes on the Dirichlet side, flat on the Neumann side.
    mode.wavenumber = pi / (2.0 * d);
    mode.shape = geom.bottom == BoundaryKind::kDirichlet ? ModeShape::kSine : ModeShape::kCosine;
    mode.amplitude = sine_amplitude;
  }
  mode.lambda0 = mode.wavenumber * mode.wavenumber;
  return mode;
}

// ---------------------------------------------------------------------------
// Lambda_1, eps*

namespace {

double trapezoid_lambda1(const Manifold& m, const CouplingFunction& f, const TransverseMode& mode,
                         int order) {
  const double h = m.param_length() / order;
  double sum = 0.0;
  for (int i = 0; i < order; ++i) {
    const double y = i * h;
    const double psi = mode.psi0(m.point(y).y);
    sum += f(y, 0.0) * psi * psi * m.arclength_weight(y);
  }
  return sum * h;
}

}  // namespace

double lambda1(const Manifold& manifold, const CouplingFunction& f, const TransverseMode& mode,
               int quadrature_order) {
  if (quadrature_order < 8) {
    throw Error(ErrorCode::kInvalidModel, "quadrature order must be at least 8");
  }
  const double value = trapezoid_lambda1(manifold, f, mode, quadrature_order);
  const double refined = trapezoid_lambda1(manifold, f, mode, 2 * quadrature_order);
  const double scale = std::max(std::abs(value), std::abs(refined));
  if (std::abs(refined - value) > 1e-8 * scale) {
    throw Error(ErrorCode::kQuadratureNotConverged,
                "order " + std::to_string(quadrature_order) + " gives " + std::to_string(value) +
                    ", doubled order gives " + std::to_string(refined));
  }
  return value;
}

double epsilon_star(double lambda1_value, double eps, double a, double threshold) {
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidModel, "eps must be positive");
  if (!(a >= -1.0 && a < 1.0)) throw Error(ErrorCode::kInvalidModel, "a must lie in [-1, 1)");
  if (!(std::abs(lambda1_value) >= threshold)) {
    throw Error(ErrorCode::kMainAssumptionViolated,
                "|Lambda_1| = " + std::to_string(std::abs(lambda1_value)) + " below threshold");
  }
  // The cell energy behaves like Lambda_0 - eta * Lambda_1 near eta = 0.
  return lambda1_value > 0.0 ? eps : eps * a;
}

// ---------------------------------------------------------------------------
// Sampling

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id) {
  // splitmix64 finalizer applied to the combined words
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> sample_omega(const Disorder& disorder, std::size_t count, std::uint64_t stream_id) {
  std::mt19937_64 engine(mix_seed(disorder.seed(), stream_id));
  std::vector<double> out(count);
  for (double& w : out) {
    const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
    w = std::clamp(disorder.inverse_cdf(u), disorder.a(), 1.0);
  }
  return out;
}

std::vector<double> periodic_configuration(std::span<const double> pattern, std::size_t period,
                                           std::size_t box_cells, double support_min) {
  if (period == 0 || period != pattern.size()) {
    throw Error(ErrorCode::kInvalidModel, "period must equal the pattern length");
  }
  for (double v : pattern) {
    if (!(v >= support_min && v <= 1.0)) {
      throw Error(ErrorCode::kValueOutOfSupport,
                  "pattern value " + std::to_string(v) + " outside [a, 1]");
    }
  }
  std::vector<double> out(box_cells);
  for (std::size_t k = 0; k < box_cells; ++k) out[k] = pattern[k % period];
  return out;
}

}  // namespace rdl
