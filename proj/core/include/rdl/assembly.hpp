#pragma once

// Bilinear finite elements on cell-conforming tensor grids over a strip
// segment. All matrices live on grid nodes until boundary conditions map
// them to degrees of freedom.

#include <Eigen/SparseCore>
#include <array>
#include <iosfwd>
#include <span>
#include <vector>

#include "rdl/model.hpp"

namespace rdl {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using Vector = Eigen::VectorXd;

struct Grid {
  int cells = 1;
  int nodes_per_cell = 8;
  int nx = 0;
  int ny = 0;
  double hx = 0.0;
  double hy = 0.0;
  double x_length = 0.0;
  double width = 0.0;

  int node(int i, int j) const { return i * ny + j; }
  int node_count() const { return nx * ny; }
  int column_of(int node) const { return node / ny; }
  int row_of(int node) const { return node % ny; }
  double x(int i) const { return i * hx; }
  double y(int j) const { return j * hy; }
  // Interface columns belong to the cell on their right; the last column to the last cell.
  int cell_of_node(int node) const;
};

/// nodes_per_cell intervals per cell along x, ceil(nodes_per_cell * d / |e1|)
/// intervals across the strip. Throws kGridTooCoarse below 8.
Grid build_grid(const LayerGeometry& geom, int cells, int nodes_per_cell);

struct BulkMatrices {
  SparseMatrix stiffness;
  SparseMatrix mass;
};

BulkMatrices assemble_bulk(const Grid& grid);

/// Quadrature points of the translated curves M_k on the grid, each carrying
/// the bilinear shape values of the element that contains it.
struct SurfacePoint {
  int cell = 0;
  double param = 0.0;
  double weight = 0.0;
  std::array<int, 4> nodes{};
  std::array<double, 4> shape{};
};

class SurfaceQuadrature {
 public:
  static constexpr int kDefaultNodesPerCrossing = 8;

  SurfaceQuadrature(const Grid& grid, const Manifold& manifold,
                    int nodes_per_crossing = kDefaultNodesPerCrossing);

  std::span<const SurfacePoint> points() const { return points_; }
  int cells() const { return cells_; }
  int node_count() const { return node_count_; }

  /// S = sum_k c_k * int_{M_k} f(y, c_k) u v ds with c_k = couplings[k].
  SparseMatrix assemble(const CouplingFunction& f, std::span<const double> couplings) const;

 private:
  std::vector<SurfacePoint> points_;
  int cells_;
  int node_count_;
};

/// Throws kCouplingOutOfRange if some |coupling| exceeds f.t0().
SparseMatrix assemble_surface(const Grid& grid, const Manifold& manifold, const CouplingFunction& f,
                              std::span<const double> couplings,
                              int nodes_per_crossing = SurfaceQuadrature::kDefaultNodesPerCrossing);

void check_coupling_range(const CouplingFunction& f, std::span<const double> couplings);

enum class LateralKind { kNeumann, kDirichlet, kPeriodic, kRobin };

struct BoundarySpec {
  BoundaryKind bottom = BoundaryKind::kDirichlet;
  BoundaryKind top = BoundaryKind::kDirichlet;
  LateralKind lateral = LateralKind::kPeriodic;
  // rho at the ny nodes of the left (x = 0) and right (x = X) faces, Robin only.
  std::vector<double> robin_left;
  std::vector<double> robin_right;
};

struct DofMap {
  std::vector<int> node_to_dof;  // -1 for eliminated nodes
  int dof_count = 0;

  static DofMap identity(int nodes);
  Vector expand(const Vector& dofs) const;
  Vector restrict_nodes(const Vector& nodes) const;
};

/// Pencil (stiffness - surface, mass). The stiffness includes any Robin
/// boundary term, so the energy form reads
///   int |grad u|^2 - int_gamma rho |u|^2 - sum_k c_k int_{M_k} f |u|^2.
struct DiscreteOperator {
  SparseMatrix stiffness;
  SparseMatrix mass;
  SparseMatrix surface;
  BoundarySpec bc;
  DofMap dofs;
  bool constrained = false;

  int size() const { return static_cast<int>(mass.rows()); }
  SparseMatrix pencil() const { return stiffness - surface; }
};

DiscreteOperator unconstrained_operator(BulkMatrices bulk, SparseMatrix surface);

/// Lateral boundary mass int_gamma rho u v ds with rho linear between nodes.
SparseMatrix robin_boundary_matrix(const Grid& grid, std::span<const double> left,
                                   std::span<const double> right);

DofMap make_dof_map(const Grid& grid, const BoundarySpec& spec);

/// Symmetric restriction P^T A P of a node-level symmetric matrix.
SparseMatrix restrict_to_dofs(const SparseMatrix& node_matrix, const DofMap& dofs);

/// Dirichlet by elimination, Neumann natural, Periodic by identifying the
/// lateral column pairs, Robin by subtracting the boundary mass term.
DiscreteOperator apply_boundary_conditions(const DiscreteOperator& op, const Grid& grid,
                                           const BoundarySpec& spec);

/// One "row col value" triple per stored entry, 17 significant digits.
void write_coordinate(const SparseMatrix& matrix, std::ostream& out);

bool exactly_symmetric(const SparseMatrix& matrix);

}  // namespace rdl
