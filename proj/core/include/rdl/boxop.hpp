#pragma once

// Finite segment of the strip made of N lattice cells with one random
// coupling per cell and the Robin condition built from a cell ground state
// on the two lateral ends.

#include <span>
#include <vector>

#include "rdl/assembly.hpp"
#include "rdl/cell.hpp"
#include "rdl/eigensolve.hpp"
#include "rdl/model.hpp"

namespace rdl {

struct BoxSpec {
  int cells = 1;
  double eps = 0.0;
  std::vector<double> omega;
  RobinTrace robin;
  Grid grid;
  double support_min = -1.0;

  void validate(const CouplingFunction& f) const;
};

/// The sub-box of `cells` lattice cells starting at cell `offset`.
struct BlockSelector {
  int offset = 0;
  int cells = 1;
};

double block_distance(const BlockSelector& b1, const BlockSelector& b2, double cell_length);

/// Caches everything that does not depend on omega, so that repeated
/// assemblies only rebuild the surface term.
class BoxProblem {
 public:
  BoxProblem(const LayerGeometry& geom, const Manifold& manifold, const CouplingFunction& f,
             const Grid& grid, const RobinTrace& robin,
             int nodes_per_crossing = SurfaceQuadrature::kDefaultNodesPerCrossing);

  DiscreteOperator assemble(double eps, std::span<const double> omega) const;

  const Grid& grid() const { return grid_; }
  const DofMap& dofs() const { return dofs_; }
  double cell_length() const { return geom_.cell_length; }

 private:
  LayerGeometry geom_;
  CouplingFunction f_;
  Grid grid_;
  BoundarySpec spec_;
  SurfaceQuadrature quadrature_;
  DofMap dofs_;
  SparseMatrix stiffness_;
  SparseMatrix mass_;
};

DiscreteOperator assemble_box(const BoxSpec& spec, const LayerGeometry& geom, const Manifold& manifold,
                              const CouplingFunction& f);

double lowest_eigenvalue(const DiscreteOperator& op, double tol = 1e-8, const EigenOptions& options = {});

struct NearCount {
  int count = 0;
  bool within = false;  // dist(spectrum, E) <= kappa
};

/// #{spectrum in [E - kappa, E + kappa]} by inertia at the two window edges.
/// Throws kWindowTooHigh when E + kappa exceeds `ceiling`.
NearCount count_eigenvalues_near(const DiscreteOperator& op, double energy, double kappa, double ceiling);

/// Distance from E to the spectrum if some eigenvalue lies within `window`
/// of E, otherwise +infinity.
double distance_to_spectrum(const DiscreteOperator& op, double energy, double window, double tol = 1e-10);

/// Power-iteration estimate of ||chi_B1 (H - lambda)^{-1} chi_B2|| in L2.
/// The estimate approaches the norm from below.
double resolvent_block_norm(const DiscreteOperator& op, const Grid& grid, double lambda,
                            const BlockSelector& b1, const BlockSelector& b2, int probes = 30,
                            double tol = 1e-10);

}  // namespace rdl
