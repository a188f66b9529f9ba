#pragma once

// Continuous model: strip geometry, interaction curve, coupling function,
// disorder distribution and the closed-form transverse quantities.

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace rdl {

enum class BoundaryKind { kDirichlet, kNeumann };

std::string_view to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(std::string_view name);

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Strip (0, inf) x (0, d) with lattice spacing `cell_length` along the
/// unbounded axis. Bottom and top conditions are independent.
struct LayerGeometry {
  double width = 1.0;
  double cell_length = 1.0;
  BoundaryKind bottom = BoundaryKind::kDirichlet;
  BoundaryKind top = BoundaryKind::kDirichlet;

  double cell_volume_prime() const { return cell_length; }
  void validate() const;
};

enum class ManifoldKind { kCircle, kSeparableLine };

/// Closed curve inside one lattice cell, described by a periodic
/// parametrization y in [0, param_length()). Translates into cell k are
/// obtained by shifting x by k * cell_length.
class Manifold {
 public:
  using Curve = std::function<Point2(double)>;

  Manifold(ManifoldKind kind, double param_length, Curve point, Curve tangent, bool oracle_only);

  static Manifold circle(Point2 center, double radius);
  // Horizontal line across the whole cell. It touches the lateral cell
  // faces, so it is only usable as a separable test geometry.
  static Manifold separable_line(double height, double cell_length);

  ManifoldKind kind() const { return kind_; }
  bool oracle_only() const { return oracle_only_; }
  double param_length() const { return param_length_; }

  Point2 point(double y) const { return point_(y); }
  Point2 tangent(double y) const { return tangent_(y); }
  Point2 normal(double y) const;
  double arclength_weight(double y) const;

  // Circle parameters; meaningful only for kind() == kCircle.
  Point2 center() const { return center_; }
  double radius() const { return radius_; }
  // Height of a SeparableLine.
  double height() const { return center_.y; }

  double length(int nodes = 4096) const;

  /// Throws kInvalidModel unless the curve keeps a positive distance from
  /// the cell boundary (oracle-only geometries are exempt).
  void validate_in_cell(const LayerGeometry& geom) const;

 private:
  ManifoldKind kind_;
  double param_length_;
  Curve point_;
  Curve tangent_;
  bool oracle_only_;
  Point2 center_{};
  double radius_ = 0.0;
};

enum class CouplingKind { kConstant, kProfile, kPolynomialInT };

/// f(y, t) on M0 x [-t0, t0].
class CouplingFunction {
 public:
  using Profile = std::function<double(double)>;

  static CouplingFunction constant(double value, double t0);
  static CouplingFunction profile(Profile g, double t0);
  // f(y, t) = sum_m coefficients[m](y) * t^m
  static CouplingFunction polynomial_in_t(std::vector<Profile> coefficients, double t0);

  double operator()(double y, double t) const;
  double t0() const { return t0_; }
  CouplingKind kind() const { return kind_; }
  bool t_independent() const { return kind_ != CouplingKind::kPolynomialInT; }
  double constant_value() const { return constant_; }

 private:
  CouplingFunction(CouplingKind kind, double t0) : kind_(kind), t0_(t0) {}

  CouplingKind kind_;
  double t0_;
  double constant_ = 0.0;
  std::vector<Profile> coefficients_;
};

/// Piecewise-linear probability density on [a, 1] with an inverse-CDF
/// sampling table of 2^12 intervals.
class Disorder {
 public:
  static constexpr int kInverseTableIntervals = 1 << 12;

  Disorder(std::vector<double> nodes, std::vector<double> values, std::uint64_t seed);

  // Flat density with linear ramps of width ramp_fraction * (1 - a) at both edges.
  static Disorder smoothed_uniform(double a, std::uint64_t seed, double ramp_fraction = 0.05);
  static Disorder triangular(double a, std::uint64_t seed);

  double a() const { return nodes_.front(); }
  std::uint64_t seed() const { return seed_; }
  Disorder with_seed(std::uint64_t seed) const;

  double density(double t) const;
  double cdf(double t) const;
  double inverse_cdf(double u) const;

  double mean() const;
  double mean_abs() const;
  double w11_norm() const { return w11_norm_; }
  double integral() const;

  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }

 private:
  double exact_quantile(double u) const;

  std::vector<double> nodes_;
  std::vector<double> values_;
  std::vector<double> cdf_;
  std::vector<double> inverse_table_;
  double w11_norm_ = 0.0;
  std::uint64_t seed_;
};

enum class ModeShape { kSine, kCosine, kConstant };

/// Lowest eigenpair of -d^2/dx^2 on (0, d) with the layer's boundary pair,
/// normalized to ||psi0||_{L2(0,d)} = 1 / sqrt(cell_length).
struct TransverseMode {
  double lambda0 = 0.0;
  double amplitude = 0.0;
  double wavenumber = 0.0;
  ModeShape shape = ModeShape::kConstant;

  double psi0(double y) const;
  double psi0_second_derivative(double y) const;
};

TransverseMode transverse_mode(const LayerGeometry& geom);

/// Periodic trapezoid quadrature of int_{M0} f(y, 0) psi0(x2(y))^2 ds.
/// Throws kQuadratureNotConverged if doubling the order moves the value by
/// more than 1e-8 relative.
double lambda1(const Manifold& manifold, const CouplingFunction& f, const TransverseMode& mode,
               int quadrature_order);

inline constexpr double kMainAssumptionThreshold = 1e-8;

/// Coupling at which the cell ground energy is lowest over [eps*a, eps].
double epsilon_star(double lambda1_value, double eps, double a,
                    double threshold = kMainAssumptionThreshold);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream_id);

std::vector<double> sample_omega(const Disorder& disorder, std::size_t count, std::uint64_t stream_id);

/// Cyclic tiling of `pattern` over `box_cells` cells.
std::vector<double> periodic_configuration(std::span<const double> pattern, std::size_t period,
                                           std::size_t box_cells, double support_min);

}  // namespace rdl
