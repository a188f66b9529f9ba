#pragma once

// Periodic single-cell problem: ground energy Lambda^eta and positive ground
// state Psi^eta under coupling eta on M0, with the layer's transverse
// conditions and periodic lateral faces.

#include <span>
#include <vector>

#include "rdl/assembly.hpp"
#include "rdl/eigensolve.hpp"
#include "rdl/model.hpp"

namespace rdl {

struct CellSolution {
  double eta = 0.0;
  double lambda_eta = 0.0;
  double residual = 0.0;
  Vector psi_eta;  // node values (periodic column duplicated), positive, M-normalized
  Grid grid;
};

/// rho = (1 / Psi) dPsi/dnu on the two lateral faces, nu the outward normal
/// of each face. One value per grid row.
struct RobinTrace {
  std::vector<double> left;
  std::vector<double> right;
  double sup_norm = 0.0;

  // max_j |rho_left(j) - rho_right(j)|
  double face_mismatch() const;
};

struct CellOptions {
  double tol = 1e-8;
  EigenOptions eigen{};
  int nodes_per_crossing = SurfaceQuadrature::kDefaultNodesPerCrossing;
  double sign_tolerance = 1e-6;
};

/// Reuses bulk matrices and curve quadrature across couplings.
class CellSolver {
 public:
  CellSolver(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
             const Grid& grid, CellOptions options = {});

  CellSolution solve(double eta) const;
  const Grid& grid() const { return grid_; }

 private:
  LayerGeometry geom_;
  CouplingFunction f_;
  Grid grid_;
  CellOptions options_;
  BulkMatrices bulk_;
  SurfaceQuadrature quadrature_;
};

CellSolution solve_cell(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                        double eta, const Grid& grid, const CellOptions& options = {});

/// Least-squares slope of eta -> Lambda^eta over a list symmetric about 0.
double perturbation_slope(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
                          const Grid& grid, std::span<const double> etas, const CellOptions& options = {});

/// Second-order one-sided differences of the ground state at x = 0 and
/// x = |e1|. Grid rows eliminated by a Dirichlet condition get values
/// extrapolated from their two neighbours.
RobinTrace robin_trace(const CellSolution& solution, const Grid& grid);

}  // namespace rdl
