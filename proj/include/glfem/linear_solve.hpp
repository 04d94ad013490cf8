// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_LINEAR_SOLVE_HPP
#define GLFEM_LINEAR_SOLVE_HPP

#include <memory>
#include <vector>
#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace glfem
{

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class MatrixKind
{
  PositiveDefinite,    // sparse Cholesky
  PositiveSemidefinite,  // Cholesky/LDLT, preconditioned CG fallback for singular systems
  Indefinite           // sparse LU with partial pivoting
};

//
// Direct sparse solver for symmetric systems. The symbolic analysis is kept as long as
// consecutive matrices share the same sparsity pattern. Every solve is followed by up to
// three steps of iterative refinement and accepted when the normwise backward error
// |b - A x| / (|A| |x| + |b|) (infinity norms) is at most the tolerance; otherwise
// SolverError is thrown.
//
class SymmetricSolver
{
public:
  explicit SymmetricSolver(MatrixKind kind = MatrixKind::PositiveDefinite, double tol = 1e-12);
  ~SymmetricSolver();
  SymmetricSolver(SymmetricSolver &&) noexcept;
  SymmetricSolver &operator=(SymmetricSolver &&) noexcept;

  void factorize(const SparseMatrix &A);
  Eigen::VectorXd solve(const Eigen::VectorXd &b) const;
  Eigen::MatrixXd solve(const Eigen::MatrixXd &B) const;

  double tolerance() const { return tol_; }
  MatrixKind kind() const { return kind_; }
  // Backward error of the last solve.
  double last_backward_error() const { return last_error_; }

private:
  struct Impl;
  MatrixKind kind_;
  double tol_;
  mutable double last_error_ = 0.0;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around SymmetricSolver.
Eigen::VectorXd linear_solve(const SparseMatrix &A, const Eigen::VectorXd &rhs,
                             MatrixKind kind = MatrixKind::PositiveDefinite, double tol = 1e-12);

// Normwise backward error |b - A x|_inf / (|A|_inf |x|_inf + |b|_inf).
double backward_error(const SparseMatrix &A, const Eigen::VectorXd &x, const Eigen::VectorXd &b);

}  // namespace glfem

#endif  // GLFEM_LINEAR_SOLVE_HPP
