#include "rdl/boxop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "rdl/error.hpp"

namespace rdl {

namespace {

Vector block_mask(const DiscreteOperator& op, const Grid& grid, const BlockSelector& block) {
  if (block.cells < 1 || block.offset < 0 || block.offset + block.cells > grid.cells) {
    throw Error(ErrorCode::kInvalidModel, "block [" + std::to_string(block.offset) + ", " +
                                              std::to_string(block.offset + block.cells) +
                                              ") does not fit in a box of " + std::to_string(grid.cells) +
                                              " cells");
  }
  const int first = block.offset * grid.nodes_per_cell;
  const int last = (block.offset + block.cells) * grid.nodes_per_cell;
  Vector mask = Vector::Zero(op.size());
  for (int n = 0; n < grid.node_count(); ++n) {
    const int dof = op.dofs.node_to_dof[n];
    const int i = grid.column_of(n);
    if (dof >= 0 && i >= first && i <= last) mask[dof] = 1.0;
  }
  return mask;
}

double m_norm(const SparseMatrix& m, const Vector& v) { return std::sqrt(v.dot(m * v)); }

}  // namespace

void BoxSpec::validate(const CouplingFunction& f) const {
  if (cells < 1) throw Error(ErrorCode::kInvalidModel, "box needs at least one cell");
  if (static_cast<int>(omega.size()) != cells) {
    throw Error(ErrorCode::kInvalidModel, "omega has " + std::to_string(omega.size()) + " entries for " +
                                              std::to_string(cells) + " cells");
  }
  if (grid.cells != cells) throw Error(ErrorCode::kInvalidModel, "grid cell count differs from the box");
  if (!(eps >= 0.0)) throw Error(ErrorCode::kInvalidModel, "eps must be non-negative");
  for (double w : omega) {
    if (!(w >= support_min && w <= 1.0)) {
      throw Error(ErrorCode::kValueOutOfSupport,
                  "omega value " + std::to_string(w) + " outside [" + std::to_string(support_min) + ", 1]");
    }
  }
  std::vector<double> couplings(omega.size());
  std::transform(omega.begin(), omega.end(), couplings.begin(), [&](double w) { return eps * w; });
  check_coupling_range(f, couplings);
  if (robin.left.empty() || robin.right.empty()) {
    throw Error(ErrorCode::kMissingRobinData, "box spec carries no Robin trace");
  }
  if (static_cast<int>(robin.left.size()) != grid.ny || static_cast<int>(robin.right.size()) != grid.ny) {
    throw Error(ErrorCode::kMissingRobinData, "Robin trace does not match the grid rows");
  }
}

double block_distance(const BlockSelector& b1, const BlockSelector& b2, double cell_length) {
  const int lo = std::max(b1.offset, b2.offset);
  const int hi = std::min(b1.offset + b1.cells, b2.offset + b2.cells);
  return std::max(0, lo - hi) * cell_length;
}

BoxProblem::BoxProblem(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                       const Grid& grid, const RobinTrace& robin, int nodes_per_crossing)
    : geom_(geom), f_(f), grid_(grid), quadrature_(grid, manifold, nodes_per_crossing) {
  geom.validate();
  manifold.validate_in_cell(geom);
  if (robin.left.empty() || robin.right.empty()) {
    throw Error(ErrorCode::kMissingRobinData, "box operator needs a Robin trace");
  }
  spec_.bottom = geom.bottom;
  spec_.top = geom.top;
  spec_.lateral = LateralKind::kRobin;
  spec_.robin_left = robin.left;
  spec_.robin_right = robin.right;
  BulkMatrices bulk = assemble_bulk(grid);
  const SparseMatrix robin_term = robin_boundary_matrix(grid, spec_.robin_left, spec_.robin_right);
  dofs_ = make_dof_map(grid, spec_);
  stiffness_ = restrict_to_dofs(SparseMatrix(bulk.stiffness - robin_term), dofs_);
  mass_ = restrict_to_dofs(bulk.mass, dofs_);
}

DiscreteOperator BoxProblem::assemble(double eps, std::span<const double> omega) const {
  if (static_cast<int>(omega.size()) != grid_.cells) {
    throw Error(ErrorCode::kInvalidModel, "omega length differs from the box cell count");
  }
  std::vector<double> couplings(omega.size());
  std::transform(omega.begin(), omega.end(), couplings.begin(), [&](double w) { return eps * w; });
  check_coupling_range(f_, couplings);
  DiscreteOperator op;
  op.stiffness = stiffness_;
  op.mass = mass_;
  op.surface = restrict_to_dofs(quadrature_.assemble(f_, couplings), dofs_);
  op.bc = spec_;
  op.dofs = dofs_;
  op.constrained = true;
  return op;
}

DiscreteOperator assemble_box(const BoxSpec& spec, const LayerGeometry& geom, const Manifold& manifold,
                              const CouplingFunction& f) {
  spec.validate(f);
  const BoxProblem problem(geom, manifold, f, spec.grid, spec.robin);
  return problem.assemble(spec.eps, spec.omega);
}

double lowest_eigenvalue(const DiscreteOperator& op, double tol, const EigenOptions& options) {
  return lowest_eigenpairs(op, 1, tol, options).eigenvalues.front();
}

NearCount count_eigenvalues_near(const DiscreteOperator& op, double energy, double kappa, double ceiling) {
  if (!(kappa >= 0.0)) throw Error(ErrorCode::kInvalidModel, "kappa must be non-negative");
  if (energy + kappa > ceiling) {
    throw Error(ErrorCode::kWindowTooHigh, "window top " + std::to_string(energy + kappa) +
                                               " exceeds the resolvable ceiling " + std::to_string(ceiling));
  }
  const SparseMatrix a = op.pencil();
  NearCount out;
  out.count = count_below(a, op.mass, energy + kappa) - count_below(a, op.mass, energy - kappa);
  out.within = out.count > 0;
  return out;
}

double distance_to_spectrum(const DiscreteOperator& op, double energy, double window, double tol) {
  const SparseMatrix a = op.pencil();
  const int inside = count_below(a, op.mass, energy + window) - count_below(a, op.mass, energy - window);
  if (inside == 0) return std::numeric_limits<double>::infinity();
  const EigenResult near = eigenpairs_near(a, op.mass, energy, 1, tol);
  return std::abs(near.eigenvalues.front() - energy);
}

double resolvent_block_norm(const DiscreteOperator& op, const Grid& grid, double lambda,
                            const BlockSelector& b1, const BlockSelector& b2, int probes, double tol) {
  if (probes < 1) throw Error(ErrorCode::kInvalidModel, "need at least one power iteration");
  const Vector p1 = block_mask(op, grid, b1);
  const Vector p2 = block_mask(op, grid, b2);
  const ShiftedSolver solver(op.pencil(), op.mass, lambda, tol);
  const SparseMatrix& m = op.mass;

  // T = P1 X P2 M with X = (A - lambda M)^{-1}; its M-adjoint is P2 X P1 M.
  auto apply_t = [&](const Vector& v) -> Vector {
    return p1.cwiseProduct(solver.solve(p2.cwiseProduct(m * v)));
  };
  auto apply_t_adjoint = [&](const Vector& v) -> Vector {
    return p2.cwiseProduct(solver.solve(p1.cwiseProduct(m * v)));
  };

  std::mt19937_64 rng(0xC0FFEEULL);
  std::uniform_real_distribution<double> unit(0.5, 1.5);
  Vector v(op.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = unit(rng);
  v = p2.cwiseProduct(v);
  double sigma = 0.0;
  for (int it = 0; it < probes; ++it) {
    const double vn = m_norm(m, v);
    if (vn == 0.0) return 0.0;
    v /= vn;
    const Vector w = apply_t(v);
    sigma = m_norm(m, w);
    if (sigma == 0.0) return 0.0;
    v = apply_t_adjoint(w);
  }
  return sigma;
}

}  // namespace rdl
