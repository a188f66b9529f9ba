#include "rdl/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "rdl/error.hpp"

namespace rdl {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Collects the upper triangle only and mirrors it, so the result is
// symmetric bit for bit regardless of summation order.
class SymmetricAssembler {
 public:
  explicit SymmetricAssembler(int n) : n_(n) {}

  void add(int r, int c, double v) {
    if (r > c) std::swap(r, c);
    upper_.emplace_back(r, c, v);
  }

  void reserve(std::size_t n) { upper_.reserve(n); }

  SparseMatrix finish() const {
    SparseMatrix upper(n_, n_);
    upper.setFromTriplets(upper_.begin(), upper_.end());
    SparseMatrix strict = upper.triangularView<Eigen::StrictlyUpper>();
    SparseMatrix full = upper + SparseMatrix(strict.transpose());
    full.makeCompressed();
    return full;
  }

 private:
  int n_;
  std::vector<Triplet> upper_;
};

constexpr std::array<int, 4> kLocalX{0, 1, 1, 0};
constexpr std::array<int, 4> kLocalY{0, 0, 1, 1};

std::array<int, 4> element_nodes(const Grid& g, int i, int j) {
  return {g.node(i, j), g.node(i + 1, j), g.node(i + 1, j + 1), g.node(i, j + 1)};
}

int element_index(double v, double h, int intervals) {
  const int k = static_cast<int>(std::floor(v / h));
  return std::clamp(k, 0, intervals - 1);
}

}  // namespace

int Grid::cell_of_node(int node) const {
  const int i = column_of(node);
  return std::min(i / nodes_per_cell, cells - 1);
}

Grid build_grid(const LayerGeometry& geom, int cells, int nodes_per_cell) {
  geom.validate();
  if (nodes_per_cell < 8) {
    throw Error(ErrorCode::kGridTooCoarse,
                "nodes_per_cell = " + std::to_string(nodes_per_cell) + " < 8");
  }
  if (cells < 1) throw Error(ErrorCode::kInvalidModel, "a box needs at least one cell");
  Grid g;
  g.cells = cells;
  g.nodes_per_cell = nodes_per_cell;
  g.nx = cells * nodes_per_cell + 1;
  const int y_intervals =
      static_cast<int>(std::ceil(nodes_per_cell * geom.width / geom.cell_length - 1e-9));
  g.ny = std::max(y_intervals, 2) + 1;
  g.hx = geom.cell_length / nodes_per_cell;
  g.hy = geom.width / (g.ny - 1);
  g.x_length = cells * geom.cell_length;
  g.width = geom.width;
  return g;
}

BulkMatrices assemble_bulk(const Grid& g) {
  const double kx[2][2] = {{1.0 / g.hx, -1.0 / g.hx}, {-1.0 / g.hx, 1.0 / g.hx}};
  const double ky[2][2] = {{1.0 / g.hy, -1.0 / g.hy}, {-1.0 / g.hy, 1.0 / g.hy}};
  const double mx[2][2] = {{g.hx / 3.0, g.hx / 6.0}, {g.hx / 6.0, g.hx / 3.0}};
  const double my[2][2] = {{g.hy / 3.0, g.hy / 6.0}, {g.hy / 6.0, g.hy / 3.0}};

  double ke[4][4];
  double me[4][4];
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      const int ax = kLocalX[a], ay = kLocalY[a], bx = kLocalX[b], by = kLocalY[b];
      ke[a][b] = kx[ax][bx] * my[ay][by] + mx[ax][bx] * ky[ay][by];
      me[a][b] = mx[ax][bx] * my[ay][by];
    }
  }

  SymmetricAssembler k(g.node_count()), m(g.node_count());
  const std::size_t entries = static_cast<std::size_t>(g.nx - 1) * (g.ny - 1) * 10;
  k.reserve(entries);
  m.reserve(entries);
  for (int i = 0; i + 1 < g.nx; ++i) {
    for (int j = 0; j + 1 < g.ny; ++j) {
      const auto nodes = element_nodes(g, i, j);
      for (int a = 0; a < 4; ++a) {
        for (int b = a; b < 4; ++b) {
          k.add(nodes[a], nodes[b], ke[a][b]);
          m.add(nodes[a], nodes[b], me[a][b]);
        }
      }
    }
  }
  return {k.finish(), m.finish()};
}

// ---------------------------------------------------------------------------
// Surface term

SurfaceQuadrature::SurfaceQuadrature(const Grid& g, const Manifold& manifold, int nodes_per_crossing)
    : cells_(g.cells), node_count_(g.node_count()) {
  if (nodes_per_crossing < 1) throw Error(ErrorCode::kInvalidModel, "need >= 1 node per crossing");
  const double cell_length = g.x_length / g.cells;
  const double period = manifold.param_length();
  const double span_estimate = manifold.length(256);
  const int samples =
      std::max(64, static_cast<int>(std::ceil(4.0 * span_estimate / std::min(g.hx, g.hy))));

  for (int k = 0; k < g.cells; ++k) {
    const double shift = k * cell_length;
    auto element_of = [&](double y) {
      const Point2 p = manifold.point(y);
      return std::pair{element_index(p.x + shift, g.hx, g.nx - 1), element_index(p.y, g.hy, g.ny - 1)};
    };

    // Parameter breakpoints at grid-line crossings.
    std::vector<double> breaks{0.0};
    for (int s = 0; s < samples; ++s) {
      double lo = period * s / samples;
      const double end = period * (s + 1) / samples;
      auto current = element_of(lo);
      const auto last = element_of(end);
      while (current != last) {
        double a = lo, b = end;
        for (int it = 0; it < 60 && b - a > 1e-15 * period; ++it) {
          const double mid = 0.5 * (a + b);
          (element_of(mid) == current ? a : b) = mid;
        }
        breaks.push_back(b);
        lo = b;
        current = element_of(b);
      }
    }
    breaks.push_back(period);

    for (std::size_t seg = 0; seg + 1 < breaks.size(); ++seg) {
      const double y0 = breaks[seg], y1 = breaks[seg + 1];
      if (!(y1 > y0)) continue;
      const double dy = (y1 - y0) / nodes_per_crossing;
      for (int q = 0; q < nodes_per_crossing; ++q) {
        const double y = y0 + (q + 0.5) * dy;
        const Point2 p = manifold.point(y);
        const double px = p.x + shift;
        const int ei = element_index(px, g.hx, g.nx - 1);
        const int ej = element_index(p.y, g.hy, g.ny - 1);
        const double xi = (px - g.x(ei)) / g.hx;
        const double eta = (p.y - g.y(ej)) / g.hy;
        SurfacePoint sp;
        sp.cell = k;
        sp.param = y;
        sp.weight = dy * manifold.arclength_weight(y);
        sp.nodes = element_nodes(g, ei, ej);
        sp.shape = {(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), xi * eta, (1.0 - xi) * eta};
        points_.push_back(sp);
      }
    }
  }
}

SparseMatrix SurfaceQuadrature::assemble(const CouplingFunction& f, std::span<const double> couplings) const {
  if (static_cast<int>(couplings.size()) != cells_) {
    throw Error(ErrorCode::kInvalidModel, "one coupling per cell required");
  }
  SymmetricAssembler s(node_count_);
  s.reserve(points_.size() * 10);
  for (const auto& p : points_) {
    const double c = couplings[p.cell];
    if (c == 0.0) continue;
    const double scale = c * f(p.param, c) * p.weight;
    for (int a = 0; a < 4; ++a) {
      for (int b = a; b < 4; ++b) s.add(p.nodes[a], p.nodes[b], scale * p.shape[a] * p.shape[b]);
    }
  }
  return s.finish();
}

void check_coupling_range(const CouplingFunction& f, std::span<const double> couplings) {
  for (std::size_t k = 0; k < couplings.size(); ++k) {
    if (std::abs(couplings[k]) > f.t0()) {
      throw Error(ErrorCode::kCouplingOutOfRange,
                  "|eps*omega_" + std::to_string(k) + "| = " + std::to_string(std::abs(couplings[k])) +
                      " exceeds t0 = " + std::to_string(f.t0()));
    }
  }
}

SparseMatrix assemble_surface(const Grid& grid, const Manifold& manifold, const CouplingFunction& f,
                              std::span<const double> couplings, int nodes_per_crossing) {
  check_coupling_range(f, couplings);
  return SurfaceQuadrature(grid, manifold, nodes_per_crossing).assemble(f, couplings);
}

// ---------------------------------------------------------------------------
// Boundary conditions

DofMap DofMap::identity(int nodes) {
  DofMap map;
  map.node_to_dof.resize(nodes);
  for (int i = 0; i < nodes; ++i) map.node_to_dof[i] = i;
  map.dof_count = nodes;
  return map;
}

Vector DofMap::expand(const Vector& dofs) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(node_to_dof.size()));
  for (std::size_t n = 0; n < node_to_dof.size(); ++n) {
    if (node_to_dof[n] >= 0) out[static_cast<Eigen::Index>(n)] = dofs[node_to_dof[n]];
  }
  return out;
}

Vector DofMap::restrict_nodes(const Vector& nodes) const {
  Vector out = Vector::Zero(dof_count);
  for (std::size_t n = 0; n < node_to_dof.size(); ++n) {
    if (node_to_dof[n] >= 0) out[node_to_dof[n]] = nodes[static_cast<Eigen::Index>(n)];
  }
  return out;
}

DiscreteOperator unconstrained_operator(BulkMatrices bulk, SparseMatrix surface) {
  DiscreteOperator op;
  op.stiffness = std::move(bulk.stiffness);
  op.mass = std::move(bulk.mass);
  op.surface = std::move(surface);
  op.dofs = DofMap::identity(op.size());
  op.bc.lateral = LateralKind::kNeumann;
  op.bc.bottom = BoundaryKind::kNeumann;
  op.bc.top = BoundaryKind::kNeumann;
  return op;
}

SparseMatrix robin_boundary_matrix(const Grid& g, std::span<const double> left,
                                   std::span<const double> right) {
  if (static_cast<int>(left.size()) != g.ny || static_cast<int>(right.size()) != g.ny) {
    throw Error(ErrorCode::kMissingRobinData, "Robin data needs one value per lateral boundary node");
  }
  SymmetricAssembler r(g.node_count());
  auto face = [&](int column, std::span<const double> rho) {
    for (int j = 0; j + 1 < g.ny; ++j) {
      const double ra = rho[j], rb = rho[j + 1];
      const int a = g.node(column, j), b = g.node(column, j + 1);
      const double w = g.hy / 12.0;
      r.add(a, a, w * (3.0 * ra + rb));
      r.add(a, b, w * (ra + rb));
      r.add(b, b, w * (ra + 3.0 * rb));
    }
  };
  face(0, left);
  face(g.nx - 1, right);
  return r.finish();
}

DofMap make_dof_map(const Grid& g, const BoundarySpec& spec) {
  DofMap map;
  map.node_to_dof.assign(g.node_count(), -1);
  auto eliminated = [&](int i, int j) {
    if (j == 0 && spec.bottom == BoundaryKind::kDirichlet) return true;
    if (j == g.ny - 1 && spec.top == BoundaryKind::kDirichlet) return true;
    if (spec.lateral == LateralKind::kDirichlet && (i == 0 || i == g.nx - 1)) return true;
    return false;
  };
  const int last_column = spec.lateral == LateralKind::kPeriodic ? g.nx - 1 : g.nx;
  int next = 0;
  for (int i = 0; i < last_column; ++i) {
    for (int j = 0; j < g.ny; ++j) {
      if (!eliminated(i, j)) map.node_to_dof[g.node(i, j)] = next++;
    }
  }
  if (spec.lateral == LateralKind::kPeriodic) {
    for (int j = 0; j < g.ny; ++j) map.node_to_dof[g.node(g.nx - 1, j)] = map.node_to_dof[g.node(0, j)];
  }
  map.dof_count = next;
  return map;
}

SparseMatrix restrict_to_dofs(const SparseMatrix& a, const DofMap& dofs) {
  SymmetricAssembler out(dofs.dof_count);
  out.reserve(static_cast<std::size_t>(a.nonZeros() / 2 + a.rows()));
  for (int col = 0; col < a.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) {
      const int row = it.row();
      if (row > col) continue;
      const int p = dofs.node_to_dof[row];
      const int q = dofs.node_to_dof[col];
      if (p < 0 || q < 0) continue;
      // An off-diagonal node pair folded onto one dof stands for both (r,c) and (c,r).
      const double v = (p == q && row != col) ? 2.0 * it.value() : it.value();
      out.add(p, q, v);
    }
  }
  return out.finish();
}

DiscreteOperator apply_boundary_conditions(const DiscreteOperator& op, const Grid& grid,
                                           const BoundarySpec& spec) {
  if (op.constrained) {
    throw Error(ErrorCode::kInvalidModel, "boundary conditions already applied");
  }
  SparseMatrix stiffness = op.stiffness;
  if (spec.lateral == LateralKind::kRobin) {
    if (spec.robin_left.empty() || spec.robin_right.empty()) {
      throw Error(ErrorCode::kMissingRobinData, "Robin lateral condition without trace values");
    }
    stiffness -= robin_boundary_matrix(grid, spec.robin_left, spec.robin_right);
  }
  DiscreteOperator out;
  out.bc = spec;
  out.dofs = make_dof_map(grid, spec);
  out.stiffness = restrict_to_dofs(stiffness, out.dofs);
  out.mass = restrict_to_dofs(op.mass, out.dofs);
  out.surface = restrict_to_dofs(op.surface, out.dofs);
  out.constrained = true;
  return out;
}

void write_coordinate(const SparseMatrix& matrix, std::ostream& out) {
  char buf[96];
  for (int col = 0; col < matrix.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(matrix, col); it; ++it) {
      std::snprintf(buf, sizeof buf, "%d %d %.17g\n", static_cast<int>(it.row()), col, it.value());
      out << buf;
    }
  }
}

bool exactly_symmetric(const SparseMatrix& matrix) {
  if (matrix.rows() != matrix.cols()) return false;
  const SparseMatrix t = matrix.transpose();
  if (t.nonZeros() != matrix.nonZeros()) return false;
  for (int col = 0; col < matrix.outerSize(); ++col) {
    SparseMatrix::InnerIterator a(matrix, col), b(t, col);
    for (; a && b; ++a, ++b) {
      if (a.row() != b.row() || a.value() != b.value()) return false;
    }
    if (a || b) return false;
  }
  return true;
}

}  // namespace rdl
