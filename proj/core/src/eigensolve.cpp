#include "rdl/eigensolve.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/IterativeLinearSolvers>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "rdl/error.hpp"

namespace rdl {

namespace {

using Mat = Eigen::MatrixXd;

Mat random_block(Eigen::Index n, Eigen::Index b, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  Mat x(n, b);
  for (Eigen::Index c = 0; c < b; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      x(r, c) = static_cast<double>(engine() >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  return x;
}

// M-orthonormalizes the columns of v (SVQB), dropping directions whose
// Gram eigenvalue is below drop * largest.
void svqb(Mat& v, const SparseMatrix& m, double drop = 1e-12) {
  if (v.cols() == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Mat mv = m * v;
    Mat g = v.transpose() * mv;
    g = 0.5 * (g + g.transpose()).eval();
    Vector scale = g.diagonal();
    for (Eigen::Index i = 0; i < scale.size(); ++i) {
      scale[i] = scale[i] > 0.0 ? 1.0 / std::sqrt(scale[i]) : 0.0;
    }
    const Mat gs = scale.asDiagonal() * g * scale.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Mat> es(gs);
    const Vector& ev = es.eigenvalues();
    const double top = ev.size() ? ev.maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
      if (ev[i] > drop * top && ev[i] > 0.0) keep.push_back(i);
    }
    Mat transform(v.cols(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
      transform.col(static_cast<Eigen::Index>(c)) =
          scale.asDiagonal() * es.eigenvectors().col(keep[c]) / std::sqrt(ev[keep[c]]);
    }
    v = (v * transform).eval();
  }
}

void project_out(Mat& w, const Mat& basis, const SparseMatrix& m) {
  if (basis.cols() == 0 || w.cols() == 0) return;
  const Mat mb = m * basis;
  w -= basis * (mb.transpose() * w);
}

double scaled_tolerance(double tol, double lambda) { return tol * std::max(1.0, std::abs(lambda)); }

std::vector<double> block_residuals(const Mat& ax, const Mat& mx, const Vector& theta) {
  std::vector<double> res(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    const double denom = mx.col(i).norm();
    res[static_cast<std::size_t>(i)] = (ax.col(i) - theta[i] * mx.col(i)).norm() / (denom > 0 ? denom : 1.0);
  }
  return res;
}

class BlockPreconditioner {
 public:
  virtual ~BlockPreconditioner() = default;
  virtual Mat apply(const Mat& r) const = 0;
};

class IncompleteCholeskyPreconditioner final : public BlockPreconditioner {
 public:
  explicit IncompleteCholeskyPreconditioner(const SparseMatrix& matrix) { ic_.compute(matrix); }
  bool ok() const { return ic_.info() == Eigen::Success; }
  Mat apply(const Mat& r) const override {
    Mat out(r.rows(), r.cols());
    for (Eigen::Index c = 0; c < r.cols(); ++c) out.col(c) = ic_.solve(Vector(r.col(c)));
    return out;
  }

 private:
  Eigen::IncompleteCholesky<double, Eigen::Lower, Eigen::AMDOrdering<int>> ic_;
};

class ShiftInvertPreconditioner final : public BlockPreconditioner {
 public:
  explicit ShiftInvertPreconditioner(ShiftedFactorization factor) : factor_(std::move(factor)) {}
  Mat apply(const Mat& r) const override { return factor_.solve(r); }

 private:
  ShiftedFactorization factor_;
};

// Shift strictly below the spectrum of (A, M), found by inertia.
ShiftedFactorization factor_below_spectrum(const SparseMatrix& a, const SparseMatrix& m) {
  double sigma = -1.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    ShiftedFactorization f(a, m, sigma);
    if (f.ok() && f.negative_count() == 0) return f;
    sigma = 4.0 * sigma - 1.0;
  }
  throw Error(ErrorCode::kNoConvergence, "could not place a shift below the spectrum");
}

EigenResult lobpcg(const SparseMatrix& a, const SparseMatrix& m, int k, double tol,
                   const EigenOptions& options, const BlockPreconditioner& precond) {
  const Eigen::Index n = a.rows();
  const Eigen::Index b = std::min<Eigen::Index>(k + std::max(options.extra_block, 0), n);

  Mat x = random_block(n, b, options.seed);
  svqb(x, m);
  Mat ax = a * x;
  {
    Mat g = x.transpose() * ax;
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    x = (x * es.eigenvectors()).eval();
  }
  Mat p(n, 0);
  Vector theta(b);
  std::vector<double> res;

  for (int it = 0; it < options.max_iterations; ++it) {
    ax = a * x;
    Mat mx = m * x;
    for (Eigen::Index i = 0; i < x.cols(); ++i) theta[i] = x.col(i).dot(ax.col(i));
    res = block_residuals(ax, mx, theta.head(x.cols()));
    bool done = true;
    std::vector<Eigen::Index> active;
    for (Eigen::Index i = 0; i < x.cols(); ++i) {
      const bool conv = res[static_cast<std::size_t>(i)] <= scaled_tolerance(tol, theta[i]);
      if (i < k && !conv) done = false;
      if (!conv) active.push_back(i);
    }
    if (done) {
      EigenResult out;
      out.iterations = it;
      out.eigenvalues.assign(theta.data(), theta.data() + k);
      out.eigenvectors = x.leftCols(k);
      out.residuals.assign(res.begin(), res.begin() + k);
      return out;
    }

    Mat r(n, static_cast<Eigen::Index>(active.size()));
    for (std::size_t c = 0; c < active.size(); ++c) {
      r.col(static_cast<Eigen::Index>(c)) = ax.col(active[c]) - theta[active[c]] * mx.col(active[c]);
    }
    Mat w = precond.apply(r);
    project_out(w, x, m);
    project_out(w, p, m);
    svqb(w, m);
    project_out(w, x, m);
    svqb(w, m);

    const Eigen::Index nw = w.cols(), np = p.cols();
    Mat s(n, b + nw + np);
    s << x, w, p;
    const Mat as = a * s;
    const Mat ms = m * s;
    Mat g = s.transpose() * as;
    Mat h = s.transpose() * ms;
    g = 0.5 * (g + g.transpose()).eval();
    h = 0.5 * (h + h.transpose()).eval();

    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es;
    es.compute(g, h);
    if (es.info() != Eigen::Success && np > 0) {
      // Ill-conditioned basis: restart without the search directions.
      s.conservativeResize(n, b + nw);
      const Mat as2 = a * s, ms2 = m * s;
      g = s.transpose() * as2;
      h = s.transpose() * ms2;
      g = 0.5 * (g + g.transpose()).eval();
      h = 0.5 * (h + h.transpose()).eval();
      es.compute(g, h);
    }
    if (es.info() != Eigen::Success) break;
    const Mat c = es.eigenvectors().leftCols(b);
    x = s * c;
    if (s.cols() > b) {
      p = s.rightCols(s.cols() - b) * c.bottomRows(s.cols() - b);
      project_out(p, x, m);
      svqb(p, m);
    } else {
      p.resize(n, 0);
    }
  }
  throw NoConvergenceError(options.max_iterations,
                           std::vector<double>(res.begin(), res.begin() + std::min<std::size_t>(k, res.size())));
}

}  // namespace

// ---------------------------------------------------------------------------

ShiftedFactorization::ShiftedFactorization(const SparseMatrix& a, const SparseMatrix& m, double shift)
    : ldlt_(std::make_unique<Eigen::SimplicialLDLT<SparseMatrix>>()), shift_(shift) {
  const SparseMatrix shifted = a - shift * m;
  ldlt_->compute(shifted);
  ok_ = ldlt_->info() == Eigen::Success;
  if (!ok_) return;
  const Vector d = ldlt_->vectorD();
  min_abs_pivot_ = d.size() ? d.cwiseAbs().minCoeff() : 0.0;
  negative_ = static_cast<int>((d.array() < 0.0).count());
  if (!(min_abs_pivot_ > 0.0) || !d.allFinite()) ok_ = false;
}

ShiftedFactorization::~ShiftedFactorization() = default;
ShiftedFactorization::ShiftedFactorization(ShiftedFactorization&&) noexcept = default;
ShiftedFactorization& ShiftedFactorization::operator=(ShiftedFactorization&&) noexcept = default;

Vector ShiftedFactorization::solve(const Vector& rhs) const { return ldlt_->solve(rhs); }

Eigen::MatrixXd ShiftedFactorization::solve(const Eigen::MatrixXd& rhs) const {
  return ldlt_->solve(rhs);
}

int count_below(const SparseMatrix& a, const SparseMatrix& m, double x) {
  ShiftedFactorization f(a, m, x);
  if (!f.ok()) {
    // x hit an eigenvalue to working precision; nudge it down by one ulp-scale step.
    const double nudged = x - 1e-13 * std::max(1.0, std::abs(x));
    ShiftedFactorization g(a, m, nudged);
    if (!g.ok()) throw Error(ErrorCode::kShiftTooCloseToSpectrum, "singular shifted pencil");
    return g.negative_count();
  }
  return f.negative_count();
}

EigenResult lowest_eigenpairs(const SparseMatrix& a, const SparseMatrix& m, int k, double tol,
                              const EigenOptions& options) {
  if (k < 1 || k >= a.rows()) throw Error(ErrorCode::kInvalidModel, "need 1 <= k < dof count");
  if (!(tol >= 1e-12 && tol <= 1e-4)) throw Error(ErrorCode::kInvalidModel, "tol outside [1e-12, 1e-4]");
  {
    Eigen::SimplicialLLT<SparseMatrix> mass_check(m);
    if (mass_check.info() != Eigen::Success) throw Error(ErrorCode::kSingularMass, "mass matrix not positive definite");
  }
  if (options.preconditioner == Preconditioner::kIncompleteCholesky) {
    IncompleteCholeskyPreconditioner ic(SparseMatrix(a + m));
    if (ic.ok()) {
      try {
        return lobpcg(a, m, k, tol, options, ic);
      } catch (const NoConvergenceError&) {
        if (!options.allow_fallback) throw;
      }
    } else if (!options.allow_fallback) {
      throw Error(ErrorCode::kNoConvergence, "incomplete factorization failed");
    }
  }
  ShiftInvertPreconditioner si(factor_below_spectrum(a, m));
  return lobpcg(a, m, k, tol, options, si);
}

EigenResult lowest_eigenpairs(const DiscreteOperator& op, int k, double tol, const EigenOptions& options) {
  return lowest_eigenpairs(op.pencil(), op.mass, k, tol, options);
}

EigenResult eigenpairs_near(const SparseMatrix& a, const SparseMatrix& m, double target, int k,
                            double tol, const EigenOptions& options) {
  const Eigen::Index n = a.rows();
  if (k < 1 || k >= n) throw Error(ErrorCode::kInvalidModel, "need 1 <= k < dof count");
  ShiftedFactorization factor(a, m, target);
  if (!factor.ok()) {
    factor = ShiftedFactorization(a, m, target - 1e-12 * std::max(1.0, std::abs(target)));
    if (!factor.ok()) throw Error(ErrorCode::kShiftTooCloseToSpectrum, "singular shifted pencil");
  }
  const Eigen::Index b = std::min<Eigen::Index>(k + std::max(options.extra_block, 1), n);
  Mat x = random_block(n, b, options.seed);
  svqb(x, m);
  std::vector<double> res;
  for (int it = 0; it < options.max_iterations; ++it) {
    Mat y = factor.solve(Mat(m * x));
    svqb(y, m);
    if (y.cols() < k) break;
    const Mat ay = a * y, my = m * y;
    Mat g = y.transpose() * ay, h = y.transpose() * my;
    g = 0.5 * (g + g.transpose()).eval();
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(g, h);
    if (es.info() != Eigen::Success) break;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.cols()));
    std::iota(order.begin(), order.end(), 0);
    const Vector& ev = es.eigenvalues();
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
      return std::abs(ev[i] - target) < std::abs(ev[j] - target);
    });
    Mat c(y.cols(), y.cols());
    Vector theta(y.cols());
    for (std::size_t i = 0; i < order.size(); ++i) {
      c.col(static_cast<Eigen::Index>(i)) = es.eigenvectors().col(order[i]);
      theta[static_cast<Eigen::Index>(i)] = ev[order[i]];
    }
    x = y * c;
    const Mat ax = a * x.leftCols(k), mx = m * x.leftCols(k);
    res = block_residuals(ax, mx, theta.head(k));
    bool done = true;
    for (int i = 0; i < k; ++i) done = done && res[static_cast<std::size_t>(i)] <= scaled_tolerance(tol, theta[i]);
    if (done) {
      std::vector<int> asc(static_cast<std::size_t>(k));
      std::iota(asc.begin(), asc.end(), 0);
      std::sort(asc.begin(), asc.end(), [&](int i, int j) { return theta[i] < theta[j]; });
      EigenResult out;
      out.iterations = it + 1;
      out.eigenvectors.resize(n, k);
      for (int i = 0; i < k; ++i) {
        out.eigenvalues.push_back(theta[asc[static_cast<std::size_t>(i)]]);
        out.eigenvectors.col(i) = x.col(asc[static_cast<std::size_t>(i)]);
        out.residuals.push_back(res[static_cast<std::size_t>(asc[static_cast<std::size_t>(i)])]);
      }
      return out;
    }
  }
  throw NoConvergenceError(options.max_iterations, res);
}

EigenResult dense_reference(const SparseMatrix& a, const SparseMatrix& m, int k) {
  if (a.rows() > kDenseReferenceLimit) {
    throw Error(ErrorCode::kProblemTooLarge,
                std::to_string(a.rows()) + " dofs exceed the dense limit " + std::to_string(kDenseReferenceLimit));
  }
  const Mat ad(a), md(m);
  Eigen::GeneralizedSelfAdjointEigenSolver<Mat> es(ad, md);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::kSingularMass, "dense generalized solve failed");
  const int count = k <= 0 ? static_cast<int>(a.rows()) : std::min<int>(k, static_cast<int>(a.rows()));
  EigenResult out;
  out.eigenvectors = es.eigenvectors().leftCols(count);
  for (int i = 0; i < count; ++i) {
    out.eigenvalues.push_back(es.eigenvalues()[i]);
    out.residuals.push_back(residual_norm(a, m, es.eigenvalues()[i], out.eigenvectors.col(i)));
  }
  return out;
}

EigenResult dense_reference(const DiscreteOperator& op, int k) {
  return dense_reference(op.pencil(), op.mass, k);
}

double residual_norm(const SparseMatrix& a, const SparseMatrix& m, double lambda, const Vector& u) {
  const Vector mu = m * u;
  const double denom = mu.norm();
  return (a * u - lambda * mu).norm() / (denom > 0 ? denom : 1.0);
}

// ---------------------------------------------------------------------------

ShiftedSolver::ShiftedSolver(const SparseMatrix& a, const SparseMatrix& m, double lambda, double tol)
    : shifted_(a - lambda * m), lambda_(lambda), tol_(tol), factor_(a, m, lambda) {
  if (!factor_.ok()) {
    throw Error(ErrorCode::kShiftTooCloseToSpectrum, "shifted pencil is singular at " + std::to_string(lambda));
  }
  // Inverse iteration on (A - lambda M)^{-1} M: its dominant eigenvalue is
  // 1 / dist(lambda, spectrum).
  Vector v = random_block(a.rows(), 1, 0x9E3779B97F4A7C15ULL).col(0);
  double mu = 0.0;
  for (int it = 0; it < 12; ++it) {
    const Vector mv = m * v;
    const double vnorm = std::sqrt(v.dot(mv));
    v /= vnorm;
    const Vector w = factor_.solve(Vector(m * v));
    mu = std::sqrt(w.dot(m * w));
    v = w;
  }
  distance_ = mu > 0.0 ? 1.0 / mu : 0.0;
  const double margin = std::sqrt(tol) * std::max(1.0, std::abs(lambda));
  if (distance_ < margin) {
    throw Error(ErrorCode::kShiftTooCloseToSpectrum,
                "distance to spectrum ~" + std::to_string(distance_) + " below margin " + std::to_string(margin));
  }
}

Vector ShiftedSolver::solve(const Vector& rhs) const {
  const double target = tol_ * rhs.norm();
  Vector x = Vector::Zero(rhs.size());
  if (rhs.norm() == 0.0) return x;
  if (factor_.negative_count() == 0) {
    // Positive definite: conjugate gradients preconditioned by the factorization.
    Vector r = rhs;
    Vector z = factor_.solve(r);
    Vector p = z;
    double rz = r.dot(z);
    for (int it = 0; it < 50; ++it) {
      const Vector ap = shifted_ * p;
      const double alpha = rz / p.dot(ap);
      x += alpha * p;
      r -= alpha * ap;
      if ((rhs - shifted_ * x).norm() <= target) return x;
      z = factor_.solve(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
  } else {
    // Indefinite: iterative refinement on the exact factorization.
    for (int it = 0; it < 50; ++it) {
      const Vector r = rhs - shifted_ * x;
      if (r.norm() <= target) return x;
      x += factor_.solve(r);
    }
  }
  if ((rhs - shifted_ * x).norm() <= target) return x;
  throw Error(ErrorCode::kShiftTooCloseToSpectrum, "shifted solve did not reach the requested residual");
}

Vector shifted_solve(const DiscreteOperator& op, double lambda, const Vector& rhs, double tol) {
  const ShiftedSolver solver(op.pencil(), op.mass, lambda, tol);
  return solver.solve(rhs);
}

}  // namespace rdl
