// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_SPECTRUM_HPP
#define GLFEM_SPECTRUM_HPP

#include <limits>
#include <optional>
#include <string>
#include <Eigen/Core>
#include "glfem/assembly.hpp"
#include "glfem/field.hpp"

namespace glfem
{

struct EigenResult
{
  Eigen::VectorXd values;          // ascending
  Eigen::MatrixXd vectors;         // M-orthonormal columns
  Eigen::VectorXd residual_norms;  // |A v - lambda M v|_2 / |M v|_2
  double gauge_angle = std::numeric_limits<double>::quiet_NaN();
  double shift = 0.0;
  int iterations = 0;
};

struct EigenOptions
{
  double tol = 1e-8;
  // Initial shift sigma with A + sigma M positive definite; raised tenfold on failure.
  std::optional<double> shift;
  int max_iters = 3000;
  int block_size = 0;  // 0: max(2k, k + 8)
  unsigned seed = 20240220u;
};

//
// k smallest eigenpairs of the symmetric pencil A v = lambda M v (M positive definite) by
// shift-invert subspace iteration: the block is multiplied by (A + sigma M)^-1 M,
// M-orthonormalized and rotated by a Rayleigh-Ritz step. Degenerate clusters are resolved
// by the Ritz step; their internal order is arbitrary.
//
EigenResult smallest_eigs(const SparseMatrix &A, const SparseMatrix &M, int k,
                          const EigenOptions &options = {});

// Angle in the M-inner product between span{v} and span{w}, accurate for small angles.
double m_angle(const Eigen::VectorXd &v, const Eigen::VectorXd &w, const SparseMatrix &M);

enum class Verdict
{
  LocallyUnique,
  NotCertified
};

struct UniquenessReport
{
  EigenResult eigs;
  Verdict verdict = Verdict::NotCertified;
  double eps_zero = 0.0;
  double gap_min = 1e-3;
  double angle_tol = 1e-3;
  std::string reason;
};

std::string to_string(Verdict verdict);

// Smallest k eigenvalues of E''(u_h) against the block mass matrix. LocallyUnique iff
// |lambda_1| <= 1e-6 kappa^2, lambda_2 >= 1e-3 and the first eigenvector is within 1e-3 rad
// of i u_h. Uses the shift sigma = 1e-3 kappa^2.
UniquenessReport verify_local_uniqueness(const ComplexField &u_h, const Problem &problem,
                                         int k = 5, double tol = 1e-8);
UniquenessReport verify_local_uniqueness(const ComplexField &u_h, const GlSystem &system,
                                         int k = 5, double tol = 1e-8);

}  // namespace glfem

#endif  // GLFEM_SPECTRUM_HPP
