#pragma once

#include <memory>

#include <Eigen/Sparse>

#include "signfem/geometry.hpp"

namespace signfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Direct solver for symmetric indefinite sparse systems.
///
/// Factorizes with partial-pivoting sparse LU and then estimates the 2-norm
/// condition number by power iteration on A and inverse iteration on A^{-1}.
/// A factorization failure or a condition estimate above `max_condition`
/// raises SingularSystem.
class IndefiniteSolver {
 public:
  static constexpr double kDefaultMaxCondition = 1e12;

  explicit IndefiniteSolver(const SparseMatrix& matrix, double max_condition = kDefaultMaxCondition);
  ~IndefiniteSolver();
  IndefiniteSolver(IndefiniteSolver&&) noexcept;
  IndefiniteSolver& operator=(IndefiniteSolver&&) noexcept;

  /// Solves A x = b, with one step of iterative refinement when the relative
  /// residual exceeds 1e-12.
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;

  double condition_estimate() const { return condition_; }
  double norm_estimate() const { return norm_; }
  /// Estimate of the smallest |eigenvalue| of A.
  double smallest_eigenvalue_estimate() const { return norm_ / condition_; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  double condition_ = 0.0;
  double norm_ = 0.0;
};

struct Inertia {
  int positive = 0;
  int negative = 0;
  int zero = 0;
};

/// Sylvester inertia of a symmetric matrix read off an LDL^T factorization.
/// Pivots with |d| <= tol * max|d| count as zero.
Inertia inertia(const SparseMatrix& symmetric, double tol = 1e-12);

}  // namespace signfem
