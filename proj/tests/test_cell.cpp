#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rdl/cell.hpp"
#include "rdl/config.hpp"
#include "rdl/error.hpp"

namespace {

using rdl::BoundaryKind;
constexpr double kPi = std::numbers::pi;

TEST(Cell, ZeroCouplingConvergesToTransverseEnergy) {
  const rdl::LayerGeometry geom{kPi, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto m = rdl::Manifold::circle({0.5, kPi / 2}, 0.25);
  const auto f = rdl::CouplingFunction::constant(1.0, 1.0);
  std::vector<double> err, h;
  for (int npc : {8, 16, 32}) {
    const auto g = rdl::build_grid(geom, 1, npc);
    err.push_back(rdl::solve_cell(geom, m, f, 0.0, g).lambda_eta - 1.0);
    h.push_back(g.hy);
  }
  for (int i = 1; i < 3; ++i) {
    EXPECT_NEAR(std::log(err[i] / err[i - 1]) / std::log(h[i] / h[i - 1]), 2.0, 0.2);
  }
}

class SeparableLine : public ::testing::TestWithParam<double> {};

TEST_P(SeparableLine, MatchesTranscendentalRoot) {
  const double sigma = GetParam();
  const double d = 1.0, h0 = d / 3.0;
  const rdl::LayerGeometry geom{d, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto line = rdl::Manifold::separable_line(h0, 1.0);
  const auto f = rdl::CouplingFunction::constant(1.0, 2.0);
  const auto g = rdl::build_grid(geom, 1, 48);
  const double lambda = rdl::solve_cell(geom, line, f, sigma, g).lambda_eta;
  const double exact = rdl::oracle::separable_line_energy(d, h0, sigma);
  EXPECT_LT(std::abs(lambda - exact) / std::abs(exact), 1e-3) << lambda << " vs " << exact;
}

INSTANTIATE_TEST_SUITE_P(Couplings, SeparableLine, ::testing::Values(-1.0, 0.5, 2.0));

TEST(SeparableOracle, BranchesMeetAtZeroEnergy) {
  const double d = 1.0, h0 = 0.25;
  const double critical = 1.0 / h0 + 1.0 / (d - h0);
  EXPECT_NEAR(rdl::oracle::separable_line_energy(d, h0, 0.0), kPi * kPi, 1e-10);
  EXPECT_LT(std::abs(rdl::oracle::separable_line_energy(d, h0, critical * (1 - 1e-9))), 1e-6);
  EXPECT_LT(rdl::oracle::separable_line_energy(d, h0, critical + 1.0), 0.0);
}

TEST(Cell, SlopeVanishesWithoutCoupling) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto g = rdl::build_grid(geom, 1, 16);
  const double etas[] = {-0.01, -0.005, 0.0, 0.005, 0.01};
  const double slope = rdl::perturbation_slope(geom, rdl::Manifold::circle({0.5, 0.5}, 0.25),
                                               rdl::CouplingFunction::constant(0.0, 1.0), g, etas);
  EXPECT_NEAR(slope, 0.0, 1e-8);
}

TEST(Cell, NeumannSlopeIsMinusLambda1) {
  const double d = 1.0, L = 1.0, r = 0.25, c = 2.0;
  const rdl::LayerGeometry geom{d, L, BoundaryKind::kNeumann, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 1, 64);
  const double etas[] = {-0.01, -0.005, 0.0, 0.005, 0.01};
  const double slope = rdl::perturbation_slope(geom, rdl::Manifold::circle({0.5, 0.5}, r),
                                               rdl::CouplingFunction::constant(c, 1.0), g, etas);
  const double expected = -c * 2.0 * kPi * r / (d * L);
  EXPECT_NEAR(slope, expected, 0.05 * std::abs(expected));
}

TEST(Cell, EnergyMovesAgainstTheSignOfLambda1) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto m = rdl::Manifold::circle({0.5, 0.5}, 0.25);
  const auto g = rdl::build_grid(geom, 1, 16);
  const rdl::CellSolver solver(geom, m, rdl::CouplingFunction::constant(1.0, 1.0), g);
  const double base = solver.solve(0.0).lambda_eta;
  EXPECT_LT(solver.solve(0.01).lambda_eta, base);
  EXPECT_GT(solver.solve(-0.01).lambda_eta, base);
}

TEST(Cell, EpsilonStarMinimizesOverTheCouplingRange) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann};
  const auto m = rdl::Manifold::circle({0.5, 0.5}, 0.25);
  const auto f = rdl::CouplingFunction::constant(1.0, 1.0);
  const auto mode = rdl::transverse_mode(geom);
  const double eps = rdl::RunConfig{}.eps_sweep, a = -0.6;
  const double star = rdl::epsilon_star(rdl::lambda1(m, f, mode, 256), eps, a);
  const auto g = rdl::build_grid(geom, 1, 16);
  const rdl::CellSolver solver(geom, m, f, g);
  const double bottom = solver.solve(star).lambda_eta;
  for (int i = 0; i < 20; ++i) {
    const double eta = eps * a + (eps - eps * a) * i / 19.0;
    EXPECT_GE(solver.solve(eta).lambda_eta, bottom - 1e-9) << eta;
  }
}

TEST(Cell, ContinuousInCoupling) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 1, 16);
  const rdl::CellSolver solver(geom, rdl::Manifold::circle({0.5, 0.5}, 0.3),
                               rdl::CouplingFunction::constant(1.0, 1.0), g);
  const double a = solver.solve(0.1).lambda_eta;
  const double b = solver.solve(0.1 + 1e-6).lambda_eta;
  EXPECT_LT(std::abs(a - b), 1e-5);
}

TEST(Cell, GroundStateIsPositiveAndNormalized) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto g = rdl::build_grid(geom, 1, 16);
  const rdl::CellSolver solver(geom, rdl::Manifold::circle({0.5, 0.5}, 0.25),
                               rdl::CouplingFunction::constant(1.0, 1.0), g);
  for (double eta : {-0.5, 0.0, 0.5}) {
    const auto sol = solver.solve(eta);
    ASSERT_EQ(sol.psi_eta.size(), g.node_count());
    for (int n = 0; n < g.node_count(); ++n) {
      const int row = g.row_of(n);
      if (row == 0 || row == g.ny - 1) continue;
      EXPECT_GT(sol.psi_eta[n], 0.0);
    }
    EXPECT_LT(sol.residual, 1e-8 * std::max(1.0, std::abs(sol.lambda_eta)));
  }
}

TEST(RobinTrace, VanishesForNeumannAtZeroCoupling) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 1, 16);
  const auto sol = rdl::solve_cell(geom, rdl::Manifold::circle({0.5, 0.5}, 0.25),
                                   rdl::CouplingFunction::constant(1.0, 1.0), 0.0, g);
  EXPECT_LT(rdl::robin_trace(sol, g).sup_norm, 1e-8);
}

TEST(RobinTrace, VanishesForDirichletAtZeroCoupling) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto g = rdl::build_grid(geom, 1, 16);
  const auto sol = rdl::solve_cell(geom, rdl::Manifold::circle({0.5, 0.5}, 0.25),
                                   rdl::CouplingFunction::constant(1.0, 1.0), 0.0, g);
  EXPECT_LT(rdl::robin_trace(sol, g).sup_norm, 1e-6);
}

TEST(RobinTrace, MirrorSymmetricCellHasMatchingFaces) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kDirichlet};
  const auto g = rdl::build_grid(geom, 1, 16);
  const auto sol = rdl::solve_cell(geom, rdl::Manifold::circle({0.5, 0.5}, 0.25),
                                   rdl::CouplingFunction::constant(1.0, 1.0), 0.3, g);
  const auto trace = rdl::robin_trace(sol, g);
  EXPECT_GT(trace.sup_norm, 1e-4);
  EXPECT_LT(trace.face_mismatch(), 1e-8);
  ASSERT_EQ(static_cast<int>(trace.left.size()), g.ny);
}

}  // namespace
