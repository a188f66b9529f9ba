#pragma once

// Sparse symmetric generalized eigenproblems A u = lambda M u with A the
// pencil stiffness - surface and M the mass matrix.

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>
#include <cstdint>
#include <memory>
#include <vector>

#include "rdl/assembly.hpp"

namespace rdl {

struct EigenResult {
  std::vector<double> eigenvalues;  // ascending
  Eigen::MatrixXd eigenvectors;     // M-orthonormal columns
  // ||A u - lambda M u||_2 / ||M u||_2 per pair
  std::vector<double> residuals;
  int iterations = 0;
};

enum class Preconditioner {
  kIncompleteCholesky,
  // Exact factorization of A - sigma M with sigma below the spectrum.
  kShiftInvert,
};

struct EigenOptions {
  int max_iterations = 2000;
  std::uint64_t seed = 0x2545F4914F6CDD1DULL;
  Preconditioner preconditioner = Preconditioner::kIncompleteCholesky;
  bool allow_fallback = true;
  int extra_block = 2;
};

/// Sparse LDL^T of A - shift * M. The count of negative pivots is the number
/// of eigenvalues strictly below the shift.
class ShiftedFactorization {
 public:
  ShiftedFactorization(const SparseMatrix& a, const SparseMatrix& m, double shift);
  ~ShiftedFactorization();
  ShiftedFactorization(ShiftedFactorization&&) noexcept;
  ShiftedFactorization& operator=(ShiftedFactorization&&) noexcept;

  bool ok() const { return ok_; }
  double shift() const { return shift_; }
  int negative_count() const { return negative_; }
  double min_abs_pivot() const { return min_abs_pivot_; }
  Vector solve(const Vector& rhs) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd& rhs) const;

 private:
  std::unique_ptr<Eigen::SimplicialLDLT<SparseMatrix>> ldlt_;
  double shift_;
  bool ok_ = false;
  int negative_ = 0;
  double min_abs_pivot_ = 0.0;
};

/// Number of eigenvalues of (A, M) strictly below x, by inertia.
int count_below(const SparseMatrix& a, const SparseMatrix& m, double x);

/// Lowest k eigenpairs by locally optimal block preconditioned conjugate
/// gradients with block size k + extra_block. Retries with the shift-invert
/// preconditioner before failing with NoConvergence.
EigenResult lowest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int k, double tol,
                              const EigenOptions& options = {});
EigenResult lowest_eigenpairs(const DiscreteOperator& op, int k, double tol,
                              const EigenOptions& options = {});

/// The k eigenpairs closest to target by shift-invert subspace iteration.
EigenResult eigenpairs_near(const SparseMatrix& a, const SparseMatrix& m, double target, int k,
                            double tol, const EigenOptions& options = {});

inline constexpr int kDenseReferenceLimit = 4000;

/// Full dense generalized solve; k lowest pairs or all of them when k <= 0.
EigenResult dense_reference(const SparseMatrix& a, const SparseMatrix& m, int k);
EigenResult dense_reference(const DiscreteOperator& op, int k);

/// Solves (A - lambda M) x = rhs to relative residual tol.
/// Throws kShiftTooCloseToSpectrum when lambda is numerically in the spectrum.
class ShiftedSolver {
 public:
  ShiftedSolver(const SparseMatrix& a, const SparseMatrix& m, double lambda, double tol);

  Vector solve(const Vector& rhs) const;
  double lambda() const { return lambda_; }
  // Upper estimate of the distance from lambda to the spectrum.
  double distance_estimate() const { return distance_; }
  int negative_count() const { return factor_.negative_count(); }

 private:
  SparseMatrix shifted_;
  double lambda_;
  double tol_;
  ShiftedFactorization factor_;
  double distance_ = 0.0;
};

Vector shifted_solve(const DiscreteOperator& op, double lambda, const Vector& rhs, double tol);

double residual_norm(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Vector& u);

}  // namespace rdl
