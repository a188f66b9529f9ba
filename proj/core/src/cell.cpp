#include "rdl/cell.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rdl/error.hpp"

namespace rdl {

double RobinTrace::face_mismatch() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < left.size() && j < right.size(); ++j) {
    worst = std::max(worst, std::abs(left[j] - right[j]));
  }
  return worst;
}

CellSolver::CellSolver(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                       const Grid& grid, CellOptions options)
    : geom_(geom),
      f_(f),
      grid_(grid),
      options_(std::move(options)),
      bulk_(assemble_bulk(grid)),
      quadrature_(grid, manifold, options_.nodes_per_crossing) {
  geom.validate();
  manifold.validate_in_cell(geom);
  if (grid.cells != 1) throw Error(ErrorCode::kInvalidModel, "cell problems use a one-cell grid");
}

CellSolution CellSolver::solve(double eta) const {
  const double coupling[1] = {eta};
  check_coupling_range(f_, coupling);

  BoundarySpec spec;
  spec.bottom = geom_.bottom;
  spec.top = geom_.top;
  spec.lateral = LateralKind::kPeriodic;
  const DiscreteOperator op = apply_boundary_conditions(
      unconstrained_operator(bulk_, quadrature_.assemble(f_, coupling)), grid_, spec);

  const EigenResult eig = lowest_eigenpairs(op, 2, options_.tol, options_.eigen);
  Vector psi = op.dofs.expand(eig.eigenvectors.col(0));
  if (psi.sum() < 0.0) psi = -psi;

  const double top = psi.cwiseAbs().maxCoeff();
  double lowest = top;
  for (std::size_t n = 0; n < op.dofs.node_to_dof.size(); ++n) {
    if (op.dofs.node_to_dof[n] >= 0) lowest = std::min(lowest, psi[static_cast<Eigen::Index>(n)]);
  }
  if (lowest < -options_.sign_tolerance * top) {
    throw Error(ErrorCode::kGroundStateSignChange,
                "ground state reaches " + std::to_string(lowest / top) + " of its maximum");
  }

  CellSolution sol;
  sol.eta = eta;
  sol.lambda_eta = eig.eigenvalues[0];
  sol.residual = eig.residuals[0];
  sol.psi_eta = std::move(psi);
  sol.grid = grid_;
  return sol;
}

CellSolution solve_cell(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                        double eta, const Grid& grid, const CellOptions& options) {
  return CellSolver(geom, manifold, f, grid, options).solve(eta);
}

double perturbation_slope(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                          const Grid& grid, std::span<const double> etas, const CellOptions& options) {
  if (etas.size() < 4) throw Error(ErrorCode::kInvalidModel, "slope fit needs at least 4 couplings");
  std::vector<double> sorted(etas.begin(), etas.end());
  std::sort(sorted.begin(), sorted.end());
  const double span = sorted.back() - sorted.front();
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (std::abs(sorted[i] + sorted[sorted.size() - 1 - i]) > 1e-12 * std::max(span, 1.0)) {
      throw Error(ErrorCode::kInvalidModel, "coupling list must be symmetric about zero");
    }
  }
  const CellSolver solver(geom, manifold, f, grid, options);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double eta : etas) {
    const double lam = solver.solve(eta).lambda_eta;
    sx += eta;
    sy += lam;
    sxx += eta * eta;
    sxy += eta * lam;
  }
  const double n = static_cast<double>(etas.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RobinTrace robin_trace(const CellSolution& solution, const Grid& grid) {
  const Vector& psi = solution.psi_eta;
  if (psi.size() != grid.node_count() || grid.nx < 3) {
    throw Error(ErrorCode::kInvalidModel, "cell solution does not match the grid");
  }
  const double top = psi.cwiseAbs().maxCoeff();
  const int last = grid.nx - 1;
  RobinTrace trace;
  trace.left.assign(grid.ny, 0.0);
  trace.right.assign(grid.ny, 0.0);
  std::vector<bool> defined(grid.ny, false);
  for (int j = 0; j < grid.ny; ++j) {
    const double v0 = psi[grid.node(0, j)];
    const double vn = psi[grid.node(last, j)];
    const bool wall = std::abs(v0) == 0.0 && std::abs(psi[grid.node(1, j)]) == 0.0;
    if (wall) continue;  // Dirichlet row
    if (v0 < 1e-12 * top || vn < 1e-12 * top) {
      throw Error(ErrorCode::kGroundStateVanishesOnBoundary,
                  "ground state at lateral row " + std::to_string(j) + " is below 1e-12 of its maximum");
    }
    // Outward normals: -x on the left face, +x on the right face.
    const double dx_left = (-3.0 * v0 + 4.0 * psi[grid.node(1, j)] - psi[grid.node(2, j)]) / (2.0 * grid.hx);
    const double dx_right =
        (3.0 * vn - 4.0 * psi[grid.node(last - 1, j)] + psi[grid.node(last - 2, j)]) / (2.0 * grid.hx);
    trace.left[j] = -dx_left / v0;
    trace.right[j] = dx_right / vn;
    defined[j] = true;
  }
  auto fill_wall = [&](int j, int n1, int n2) {
    if (defined[j] || n2 < 0 || n2 >= grid.ny || !defined[n1] || !defined[n2]) return;
    trace.left[j] = 2.0 * trace.left[n1] - trace.left[n2];
    trace.right[j] = 2.0 * trace.right[n1] - trace.right[n2];
  };
  fill_wall(0, 1, 2);
  fill_wall(grid.ny - 1, grid.ny - 2, grid.ny - 3);
  for (int j = 0; j < grid.ny; ++j) {
    trace.sup_norm = std::max({trace.sup_norm, std::abs(trace.left[j]), std::abs(trace.right[j])});
  }
  return trace;
}

}  // namespace rdl
