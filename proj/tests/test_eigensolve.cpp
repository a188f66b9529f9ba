#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "rdl/assembly.hpp"
#include "rdl/eigensolve.hpp"
#include "rdl/error.hpp"

namespace {

using rdl::BoundaryKind;

rdl::SparseMatrix sparse(const Eigen::MatrixXd& d) { return d.sparseView(); }

rdl::SparseMatrix identity(int n) {
  rdl::SparseMatrix m(n, n);
  m.setIdentity();
  return m;
}

// Thin Neumann strip with Dirichlet lateral ends: the y-constant modes are
// exactly the eigenvalues of the 1D linear element chain along x.
rdl::DiscreteOperator chain_operator(int n) {
  const rdl::LayerGeometry geom{0.05, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 1, n);
  rdl::SparseMatrix zero(g.node_count(), g.node_count());
  rdl::BoundarySpec s;
  s.bottom = s.top = BoundaryKind::kNeumann;
  s.lateral = rdl::LateralKind::kDirichlet;
  return rdl::apply_boundary_conditions(rdl::unconstrained_operator(rdl::assemble_bulk(g), zero), g, s);
}

struct RandomPencil {
  rdl::SparseMatrix a, m;
};

RandomPencil random_pencil(int n, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(n, n), b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      a(i, j) = normal(gen);
      b(i, j) = normal(gen);
    }
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const Eigen::MatrixXd spd = b * b.transpose() / n + Eigen::MatrixXd::Identity(n, n);
  return {sparse(sym), sparse(0.5 * (spd + spd.transpose()))};
}

TEST(Lobpcg, LinearChainMatchesAnalyticSpectrum) {
  constexpr int n = 16;
  const auto op = chain_operator(n);
  const auto eig = rdl::lowest_eigenpairs(op, 6, 1e-11);
  for (int j = 1; j <= 6; ++j) {
    const double exact = rdl::oracle::linear_chain_eigenvalue(j, n, 1.0 / n);
    EXPECT_NEAR(eig.eigenvalues[j - 1], exact, 1e-10 * exact) << j;
  }
}

TEST(Lobpcg, AgreesWithDenseOnAssembledPencil) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kDirichlet, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 2, 10);
  const double c[] = {0.4, -0.3};
  auto base = rdl::unconstrained_operator(
      rdl::assemble_bulk(g),
      rdl::assemble_surface(g, rdl::Manifold::circle({0.5, 0.5}, 0.3), rdl::CouplingFunction::constant(1, 1), c));
  rdl::BoundarySpec s;
  s.bottom = BoundaryKind::kDirichlet;
  s.top = BoundaryKind::kNeumann;
  s.lateral = rdl::LateralKind::kPeriodic;
  const auto op = rdl::apply_boundary_conditions(base, g, s);
  const auto dense = rdl::dense_reference(op, 5);
  for (auto pre : {rdl::Preconditioner::kIncompleteCholesky, rdl::Preconditioner::kShiftInvert}) {
    rdl::EigenOptions o;
    o.preconditioner = pre;
    const auto eig = rdl::lowest_eigenpairs(op, 5, 1e-10, o);
    for (int i = 0; i < 5; ++i) {
      EXPECT_NEAR(eig.eigenvalues[i], dense.eigenvalues[i], 1e-8 * std::max(1.0, std::abs(dense.eigenvalues[i])));
      EXPECT_LT(eig.residuals[i], 1e-10 * std::max(1.0, std::abs(eig.eigenvalues[i])));
    }
    const Eigen::MatrixXd gram = eig.eigenvectors.transpose() * (op.mass * eig.eigenvectors);
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Lobpcg, IdentityPencil) {
  const rdl::LayerGeometry geom{1.0, 1.0, BoundaryKind::kNeumann, BoundaryKind::kNeumann};
  const auto g = rdl::build_grid(geom, 1, 8);
  const auto mass = rdl::assemble_bulk(g).mass;
  const auto eig = rdl::lowest_eigenpairs(mass, mass, 4, 1e-10);
  for (double v : eig.eigenvalues) EXPECT_NEAR(v, 1.0, 1e-10);
}

TEST(Lobpcg, TwoByTwo) {
  Eigen::MatrixXd k(2, 2);
  k << 1, 0, 0, 2;
  const auto eig = rdl::lowest_eigenpairs(sparse(k), identity(2), 1, 1e-10);
  EXPECT_NEAR(eig.eigenvalues[0], 1.0, 1e-12);
  const auto dense = rdl::dense_reference(sparse(k), identity(2), 0);
  EXPECT_NEAR(dense.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(dense.eigenvalues[1], 2.0, 1e-14);
}

TEST(Lobpcg, RandomDensePencilResiduals) {
  const auto p = random_pencil(50, 3);
  const auto dense = rdl::dense_reference(p.a, p.m, 0);
  for (int i = 0; i < 50; ++i) {
    EXPECT_LT(rdl::residual_norm(p.a, p.m, dense.eigenvalues[i], dense.eigenvectors.col(i)), 1e-10);
  }
  const auto eig = rdl::lowest_eigenpairs(p.a, p.m, 4, 1e-11);
  for (int i = 0; i < 4; ++i) {
    EXPECT_LT(rdl::residual_norm(p.a, p.m, eig.eigenvalues[i], eig.eigenvectors.col(i)), 1e-10);
    EXPECT_NEAR(eig.eigenvalues[i], dense.eigenvalues[i], 1e-9);
  }
}

TEST(Lobpcg, DeterministicUnderFixedSeed) {
  const auto op = chain_operator(24);
  const auto a = rdl::lowest_eigenpairs(op, 3, 1e-9);
  const auto b = rdl::lowest_eigenpairs(op, 3, 1e-9);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.iterations, b.iterations);
}

TEST(Lobpcg, SingularMass) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(4, 4);
  m(3, 3) = 0.0;
  try {
    rdl::lowest_eigenpairs(identity(4), sparse(m), 1, 1e-8);
    FAIL();
  } catch (const rdl::Error& e) {
    EXPECT_EQ(e.code(), rdl::ErrorCode::kSingularMass);
  }
}

TEST(Dense, RejectsLargeProblems) {
  try {
    rdl::dense_reference(identity(rdl::kDenseReferenceLimit + 1), identity(rdl::kDenseReferenceLimit + 1), 1);
    FAIL();
  } catch (const rdl::Error& e) {
    EXPECT_EQ(e.code(), rdl::ErrorCode::kProblemTooLarge);
  }
}

TEST(Inertia, CountBelowMatchesDense) {
  const auto p = random_pencil(40, 8);
  const auto dense = rdl::dense_reference(p.a, p.m, 0);
  for (double x : {-3.0, -1.0, -0.2, 0.0, 0.5, 2.0}) {
    int expected = 0;
    for (double v : dense.eigenvalues) expected += v < x;
    EXPECT_EQ(rdl::count_below(p.a, p.m, x), expected) << x;
  }
}

TEST(ShiftedSolve, RecoversKnownSolutionFarBelow) {
  const auto op = chain_operator(20);
  const double lambda = -50.0;
  rdl::Vector y(op.size());
  for (int i = 0; i < op.size(); ++i) y[i] = std::sin(0.37 * i) + 0.1 * i;
  const rdl::Vector rhs = op.pencil() * y - lambda * (op.mass * y);
  const double tol = 1e-10;
  const rdl::Vector x = rdl::shifted_solve(op, lambda, rhs, tol);
  EXPECT_LT((x - y).norm(), 10 * tol * y.norm());
}

TEST(ShiftedSolve, InteriorShiftStillSolves) {
  const auto op = chain_operator(20);
  const auto eig = rdl::lowest_eigenpairs(op, 3, 1e-10);
  const double lambda = 0.5 * (eig.eigenvalues[1] + eig.eigenvalues[2]);
  rdl::Vector y = rdl::Vector::LinSpaced(op.size(), -1.0, 2.0);
  const rdl::Vector rhs = op.pencil() * y - lambda * (op.mass * y);
  const rdl::Vector x = rdl::shifted_solve(op, lambda, rhs, 1e-10);
  EXPECT_LT((x - y).norm(), 1e-8 * y.norm());
}

TEST(ShiftedSolve, AtAnEigenvalueThrows) {
  const auto op = chain_operator(16);
  const double lambda = rdl::dense_reference(op, 1).eigenvalues[0];
  try {
    rdl::shifted_solve(op, lambda, rdl::Vector::Ones(op.size()), 1e-10);
    FAIL();
  } catch (const rdl::Error& e) {
    EXPECT_EQ(e.code(), rdl::ErrorCode::kShiftTooCloseToSpectrum);
  }
}

TEST(ShiftedSolve, DistanceEstimate) {
  const auto op = chain_operator(16);
  const double lambda1 = rdl::dense_reference(op, 1).eigenvalues[0];
  const rdl::ShiftedSolver solver(op.pencil(), op.mass, lambda1 - 2.0, 1e-10);
  EXPECT_NEAR(solver.distance_estimate(), 2.0, 1e-6);
  EXPECT_EQ(solver.negative_count(), 0);
}

TEST(Near, FindsClosestPairs) {
  const auto op = chain_operator(16);
  const auto dense = rdl::dense_reference(op, 6);
  const double target = dense.eigenvalues[3] + 0.1;
  const auto near = rdl::eigenpairs_near(op.pencil(), op.mass, target, 1, 1e-10);
  EXPECT_NEAR(near.eigenvalues[0], dense.eigenvalues[3], 1e-8 * dense.eigenvalues[3]);
}

TEST(RayleighQuotient, EigenvectorsReproduceEigenvalues) {
  const auto op = chain_operator(16);
  const auto eig = rdl::lowest_eigenpairs(op, 3, 1e-10);
  const rdl::SparseMatrix a = op.pencil();
  for (int i = 0; i < 3; ++i) {
    const rdl::Vector u = eig.eigenvectors.col(i);
    EXPECT_NEAR(u.dot(a * u) / u.dot(op.mass * u), eig.eigenvalues[i], 1e-12 * eig.eigenvalues[i]);
  }
}

}  // namespace
