// SPDX-License-Identifier: Apache-2.0

#include "glfem/spectrum.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <Eigen/Eigenvalues>
#include "glfem/errors.hpp"
#include "glfem/linear_solve.hpp"

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

// Modified Gram-Schmidt in the M-inner product, two passes.
void m_orthonormalize(Eigen::MatrixXd &Y, const SparseMatrix &M)
{
  Eigen::MatrixXd MY = M * Y;
  for (int pass = 0; pass < 2; ++pass)
  {
    for (Eigen::Index j = 0; j < Y.cols(); ++j)
    {
      for (Eigen::Index i = 0; i < j; ++i)
      {
        const double c = Y.col(i).dot(MY.col(j));
        Y.col(j) -= c * Y.col(i);
        MY.col(j) -= c * MY.col(i);
      }
      const double nrm = std::sqrt(std::max(0.0, Y.col(j).dot(MY.col(j))));
      if (!(nrm > 0.0))
      {
        throw SolverError("smallest_eigs: subspace collapsed during orthonormalization");
      }
      Y.col(j) /= nrm;
      MY.col(j) /= nrm;
    }
  }
}

}  // namespace

EigenResult smallest_eigs(const SparseMatrix &A, const SparseMatrix &M, int k,
                          const EigenOptions &options)
{
  const Eigen::Index dim = A.rows();
  if (k < 1 || k > dim)
  {
    throw std::invalid_argument("smallest_eigs: need 1 <= k <= dimension");
  }
  if (A.cols() != dim || M.rows() != dim || M.cols() != dim)
  {
    throw std::invalid_argument("smallest_eigs: A and M must be square of equal size");
  }
  const Eigen::Index p =
      std::min<Eigen::Index>(dim, options.block_size > 0 ? std::max(options.block_size, k)
                                                         : std::max(2 * k, k + 8));

  // Shift so that A + sigma M is positive definite.
  const double scale = inf_norm(A) / std::max(inf_norm(M), std::numeric_limits<double>::min());
  double sigma = options.shift.value_or(0.0);
  SymmetricSolver solver(MatrixKind::PositiveDefinite, 1e-10);
  bool factored = false;
  for (int attempt = 0; attempt < 16 && !factored; ++attempt)
  {
    try
    {
      const SparseMatrix K = A + sigma * M;
      solver.factorize(K);
      factored = true;
    }
    catch (const SolverError &)
    {
      sigma = sigma > 0.0 ? 10.0 * sigma : 1e-6 * std::max(scale, 1.0);
    }
  }
  if (!factored)
  {
    throw SolverError("smallest_eigs: no positive definite shift found");
  }

  std::mt19937 rng(options.seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd X(dim, p);
  for (Eigen::Index j = 0; j < p; ++j)
  {
    for (Eigen::Index i = 0; i < dim; ++i)
    {
      X(i, j) = normal(rng);
    }
  }
  m_orthonormalize(X, M);

  EigenResult result;
  result.shift = sigma;
  for (int it = 1; it <= options.max_iters; ++it)
  {
    Eigen::MatrixXd Y = solver.solve(Eigen::MatrixXd(M * X));
    m_orthonormalize(Y, M);
    Eigen::MatrixXd AY = A * Y;
    Eigen::MatrixXd T = Y.transpose() * AY;
    T = 0.5 * (T + T.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(T);
    X = Y * ritz.eigenvectors();
    const Eigen::MatrixXd AX = AY * ritz.eigenvectors();
    const Eigen::MatrixXd MX = M * X.leftCols(k);

    Eigen::VectorXd res(k);
    for (int j = 0; j < k; ++j)
    {
      const double lambda = ritz.eigenvalues()(j);
      res(j) = (AX.col(j) - lambda * MX.col(j)).norm() / MX.col(j).norm();
    }
    result.iterations = it;
    if ((res.array() <= options.tol).all() || it == options.max_iters)
    {
      result.values = ritz.eigenvalues().head(k);
      result.vectors = X.leftCols(k);
      result.residual_norms = res;
      if (!(res.array() <= options.tol).all())
      {
        throw SolverError("smallest_eigs: no convergence after " + std::to_string(it) +
                          " iterations (max residual " + std::to_string(res.maxCoeff()) + ")");
      }
      break;
    }
  }
  return result;
}

double m_angle(const Eigen::VectorXd &v, const Eigen::VectorXd &w, const SparseMatrix &M)
{
  const Eigen::VectorXd Mv = M * v;
  const double vv = v.dot(Mv);
  const double vw = w.dot(Mv);
  const Eigen::VectorXd w_perp = w - (vw / vv) * v;
  const double perp = std::sqrt(std::max(0.0, w_perp.dot(M * w_perp)));
  return std::atan2(perp, std::abs(vw) / std::sqrt(vv));
}

std::string to_string(Verdict verdict)
{
  return verdict == Verdict::LocallyUnique ? "LocallyUnique" : "NotCertified";
}

UniquenessReport verify_local_uniqueness(const ComplexField &u_h, const Problem &problem, int k,
                                         double tol)
{
  const GlSystem system(problem, u_h.mesh_ptr());
  return verify_local_uniqueness(u_h, system, k, tol);
}

UniquenessReport verify_local_uniqueness(const ComplexField &u_h, const GlSystem &system, int k,
                                         double tol)
{
  const double kappa = system.kappa();
  const Eigen::VectorXd c = u_h.coefficients();
  const SparseMatrix H = system.hessian(c);
  EigenOptions options;
  options.tol = tol;
  options.shift = kappa > 0.0 ? 1e-3 * kappa * kappa : 1e-3;

  UniquenessReport report;
  report.eigs = smallest_eigs(H, system.mass_block(), k, options);
  report.eps_zero = 1e-6 * kappa * kappa;
  const Eigen::VectorXd iu = u_h.times_i().coefficients();
  report.eigs.gauge_angle = m_angle(report.eigs.vectors.col(0), iu, system.mass_block());

  const double l1 = report.eigs.values(0);
  const double l2 = k > 1 ? report.eigs.values(1) : std::numeric_limits<double>::infinity();
  if (!(std::abs(l1) <= report.eps_zero))
  {
    report.reason = "lambda_1 is not numerically zero";
  }
  else if (!(l2 >= report.gap_min))
  {
    report.reason = "lambda_2 below gap threshold";
  }
  else if (!(report.eigs.gauge_angle <= report.angle_tol))
  {
    report.reason = "first eigenvector not aligned with i u_h";
  }
  else
  {
    report.verdict = Verdict::LocallyUnique;
    report.reason = "ok";
  }
  return report;
}

}  // namespace glfem
