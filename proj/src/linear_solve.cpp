// SPDX-License-Identifier: Apache-2.0

#include "glfem/linear_solve.hpp"

#include <cmath>
#include <optional>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include "glfem/errors.hpp"

namespace glfem
{

namespace
{

double inf_norm(const SparseMatrix &A)
{
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
    {
      rows(it.row()) += std::abs(it.value());
    }
  }
  return rows.size() ? rows.maxCoeff() : 0.0;
}

bool same_pattern(const SparseMatrix &a, const SparseMatrix &b)
{
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.nonZeros() != b.nonZeros())
  {
    return false;
  }
  const auto n = a.outerSize();
  return std::equal(a.outerIndexPtr(), a.outerIndexPtr() + n + 1, b.outerIndexPtr()) &&
         std::equal(a.innerIndexPtr(), a.innerIndexPtr() + a.nonZeros(), b.innerIndexPtr());
}

double backward_error(double a_norm, const SparseMatrix &A, const Eigen::VectorXd &x,
                      const Eigen::VectorXd &b)
{
  const double denom = a_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  return denom == 0.0 ? 0.0 : (b - A * x).lpNorm<Eigen::Infinity>() / denom;
}

}  // namespace

struct SymmetricSolver::Impl
{
  SparseMatrix A;
  double a_norm = 0.0;
  bool analyzed = false;
  enum class Active
  {
    None,
    LLT,
    LDLT,
    CG,
    LU
  } active = Active::None;
  Eigen::SimplicialLLT<SparseMatrix> llt;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  bool ldlt_analyzed = false;
  Eigen::SparseLU<SparseMatrix> lu;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg;

  Eigen::VectorXd raw_solve(const Eigen::VectorXd &b) const
  {
    switch (active)
    {
      case Active::LLT:
        return llt.solve(b);
      case Active::LDLT:
        return ldlt.solve(b);
      case Active::LU:
        return lu.solve(b);
      case Active::CG:
        return cg.solve(b);
      case Active::None:
        break;
    }
    throw SolverError("linear solve: no factorization available");
  }
};

SymmetricSolver::SymmetricSolver(MatrixKind kind, double tol)
  : kind_(kind), tol_(tol), impl_(std::make_unique<Impl>())
{
}

SymmetricSolver::~SymmetricSolver() = default;
SymmetricSolver::SymmetricSolver(SymmetricSolver &&) noexcept = default;
SymmetricSolver &SymmetricSolver::operator=(SymmetricSolver &&) noexcept = default;

void SymmetricSolver::factorize(const SparseMatrix &A)
{
  if (A.rows() != A.cols())
  {
    throw SolverError("linear solve: matrix is not square");
  }
  Impl &s = *impl_;
  const bool reuse = s.analyzed && same_pattern(s.A, A);
  s.A = A;
  s.A.makeCompressed();
  s.a_norm = inf_norm(s.A);
  s.active = Impl::Active::None;
  if (!reuse)
  {
    s.analyzed = false;
    s.ldlt_analyzed = false;
  }

  if (kind_ == MatrixKind::Indefinite)
  {
    if (!reuse)
    {
      s.lu.analyzePattern(s.A);
      s.analyzed = true;
    }
    s.lu.factorize(s.A);
    if (s.lu.info() != Eigen::Success)
    {
      throw SolverError("linear solve: sparse LU factorization failed: " + s.lu.lastErrorMessage());
    }
    s.active = Impl::Active::LU;
    return;
  }

  if (!reuse)
  {
    s.llt.analyzePattern(s.A);
    s.analyzed = true;
  }
  s.llt.factorize(s.A);
  if (s.llt.info() == Eigen::Success)
  {
    s.active = Impl::Active::LLT;
    return;
  }
  if (!s.ldlt_analyzed)
  {
    s.ldlt.analyzePattern(s.A);
    s.ldlt_analyzed = true;
  }
  s.ldlt.factorize(s.A);
  if (s.ldlt.info() == Eigen::Success && s.ldlt.vectorD().allFinite() &&
      (s.ldlt.vectorD().array().abs() > 1e-14 * s.a_norm).all())
  {
    s.active = Impl::Active::LDLT;
    return;
  }
  if (kind_ == MatrixKind::PositiveSemidefinite)
  {
    s.cg.setTolerance(0.01 * tol_);
    s.cg.setMaxIterations(std::max<Eigen::Index>(1000, 20 * s.A.rows()));
    s.cg.compute(s.A);
    s.active = Impl::Active::CG;
    return;
  }
  throw SolverError("linear solve: matrix is not positive definite (Cholesky and LDLT failed)");
}

Eigen::VectorXd SymmetricSolver::solve(const Eigen::VectorXd &b) const
{
  const Impl &s = *impl_;
  if (b.size() != s.A.rows())
  {
    throw SolverError("linear solve: right-hand side has wrong length");
  }
  if (b.lpNorm<Eigen::Infinity>() == 0.0)
  {
    last_error_ = 0.0;
    return Eigen::VectorXd::Zero(b.size());
  }
  Eigen::VectorXd x = s.raw_solve(b);
  if (!x.allFinite())
  {
    throw SolverError("linear solve: solution is not finite");
  }
  double err = backward_error(s.a_norm, s.A, x, b);
  for (int step = 0; step < 3 && err > 1e-2 * tol_ && s.active != Impl::Active::CG; ++step)
  {
    const Eigen::VectorXd r = b - s.A * x;
    const Eigen::VectorXd x_new = x + s.raw_solve(r);
    const double err_new = backward_error(s.a_norm, s.A, x_new, b);
    if (!(err_new < err))
    {
      break;
    }
    x = x_new;
    err = err_new;
  }
  last_error_ = err;
  if (!(err <= tol_))
  {
    throw SolverError("linear solve: backward error " + std::to_string(err) +
                      " exceeds tolerance " + std::to_string(tol_));
  }
  return x;
}

Eigen::MatrixXd SymmetricSolver::solve(const Eigen::MatrixXd &B) const
{
  Eigen::MatrixXd X(B.rows(), B.cols());
  for (Eigen::Index j = 0; j < B.cols(); ++j)
  {
    X.col(j) = solve(Eigen::VectorXd(B.col(j)));
  }
  return X;
}

Eigen::VectorXd linear_solve(const SparseMatrix &A, const Eigen::VectorXd &rhs, MatrixKind kind,
                             double tol)
{
  SymmetricSolver solver(kind, tol);
  solver.factorize(A);
  return solver.solve(rhs);
}

double backward_error(const SparseMatrix &A, const Eigen::VectorXd &x, const Eigen::VectorXd &b)
{
  return backward_error(inf_norm(A), A, x, b);
}

}  // namespace glfem
