#include "signfem/solver.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <fmt/format.h>

namespace signfem {

namespace {

constexpr int kPowerIterations = 30;

Eigen::VectorXd start_vector(Eigen::Index n) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = dist(rng);
  return v.normalized();
}

}  // namespace

struct IndefiniteSolver::Impl {
  SparseMatrix matrix;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
};

IndefiniteSolver::IndefiniteSolver(const SparseMatrix& matrix, double max_condition) : impl_(std::make_unique<Impl>()) {
  if (matrix.rows() != matrix.cols() || matrix.rows() == 0) {
    throw InvalidArgument(fmt::format("solver needs a non-empty square matrix, got {}x{}", matrix.rows(), matrix.cols()));
  }
  impl_->matrix = matrix;
  impl_->matrix.makeCompressed();
  impl_->lu.analyzePattern(impl_->matrix);
  impl_->lu.factorize(impl_->matrix);
  if (impl_->lu.info() != Eigen::Success) {
    throw SingularSystem("sparse LU factorization failed: " + impl_->lu.lastErrorMessage());
  }

  Eigen::VectorXd v = start_vector(matrix.rows());
  double upper = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::VectorXd w = matrix * v;
    upper = w.norm();
    if (upper == 0.0) break;
    v = w / upper;
  }
  norm_ = upper;

  v = start_vector(matrix.rows());
  double inverse = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    Eigen::VectorXd w = impl_->lu.solve(v);
    inverse = w.norm();
    if (!std::isfinite(inverse) || inverse == 0.0) {
      inverse = std::numeric_limits<double>::infinity();
      break;
    }
    v = w / inverse;
  }
  condition_ = norm_ * inverse;
  if (!(condition_ <= max_condition)) {
    throw SingularSystem(fmt::format("matrix is numerically singular (condition estimate {:.3e} > {:.1e})",
                                     condition_, max_condition));
  }
}

IndefiniteSolver::~IndefiniteSolver() = default;
IndefiniteSolver::IndefiniteSolver(IndefiniteSolver&&) noexcept = default;
IndefiniteSolver& IndefiniteSolver::operator=(IndefiniteSolver&&) noexcept = default;

Eigen::VectorXd IndefiniteSolver::solve(const Eigen::VectorXd& rhs) const {
  Eigen::VectorXd x = impl_->lu.solve(rhs);
  const double bnorm = rhs.norm();
  if (bnorm == 0.0) return x;
  Eigen::VectorXd r = rhs - impl_->matrix * x;
  if (r.norm() > 1e-12 * bnorm) x += impl_->lu.solve(r);
  return x;
}

Inertia inertia(const SparseMatrix& symmetric, double tol) {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt(symmetric);
  Inertia out;
  if (ldlt.info() != Eigen::Success) {
    throw SingularSystem("LDL^T factorization hit a zero pivot");
  }
  const Eigen::VectorXd d = ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(d(i)) <= tol * scale) {
      ++out.zero;
    } else if (d(i) > 0.0) {
      ++out.positive;
    } else {
      ++out.negative;
    }
  }
  return out;
}

}  // namespace signfem
