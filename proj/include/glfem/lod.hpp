// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_LOD_HPP
#define GLFEM_LOD_HPP

#include <memory>
#include <vector>
#include <Eigen/Core>
#include "glfem/assembly.hpp"
#include "glfem/field.hpp"
#include "glfem/minimize.hpp"
#include "glfem/study.hpp"

namespace glfem
{

//
// Two-grid LOD space: the images b_j of the coarse hat functions under the inverse of the
// fine a-hat_kappa operator,
//
//   a-hat(b_j, v) = m(phi_j^H, v)  for all fine v.
//
// Only real hats are solved for; the image of i phi_j^H is i b_j. Reduced coefficients use
// the layout [y_re; y_im] with fine coefficients X y_re + i X y_im.
//
class LodBasis
{
public:
  LodBasis(MeshPtr coarse, MeshPtr fine, Eigen::MatrixXd columns);

  const MeshPtr &coarse() const { return coarse_; }
  const MeshPtr &fine() const { return fine_; }
  // 2 N_h x N_H, column j holds [re; im] of b_j.
  const Eigen::MatrixXd &columns() const { return X_; }
  Eigen::Index coarse_nodes() const { return X_.cols(); }
  Eigen::Index reduced_dim() const { return 2 * X_.cols(); }

  // Fine coefficients of the reduced vector y.
  Eigen::VectorXd expand(const Eigen::VectorXd &y) const;
  ComplexField field(const Eigen::VectorXd &y) const;
  // B^T v for a fine coefficient vector v.
  Eigen::VectorXd restrict_dual(const Eigen::VectorXd &v) const;
  // B^T A B. When A commutes with multiplication by i only half the products are needed.
  Eigen::MatrixXd reduce(const SparseMatrix &A, bool commutes_with_i) const;

private:
  MeshPtr coarse_, fine_;
  Eigen::MatrixXd X_;
};

// Requires kappa > 0 (beta^2 = 0 makes the operator singular) and n_h / n_H a power of two.
LodBasis build_lod_basis(int n_H, int n_h, const Problem &problem);
LodBasis build_lod_basis(MeshPtr coarse, const GlSystem &fine_system);

// Maximum over columns of |A-hat b_j - M P phi_j| / |M P phi_j| (infinity norms).
double lod_basis_residual(const LodBasis &basis, const GlSystem &fine_system);

// Solves directly for the image of i phi_j^H and returns its distance to i b_j,
// relative to |b_j| (infinity norms).
double lod_linearity_defect(const LodBasis &basis, const GlSystem &fine_system, Eigen::Index j);

struct LodProjection
{
  Eigen::VectorXd coefficients;  // reduced
  ComplexField field;            // fine representative
  double orthogonality_residual = 0.0;  // |B^T A-hat (u - B y)|_inf / |B^T A-hat u|_inf
};

// a-hat_kappa Ritz projection onto span(basis).
LodProjection lod_ritz_project(const ComplexField &u_fine, const LodBasis &basis,
                               const GlSystem &fine_system);

// Gradient flow and gauge-fixed Newton restricted to span(basis), started from the Ritz
// projection of the initial field. Same stopping rules as minimize(); residual norms are
// those of the reduced gradient B^T E'(u).
MinimizeReport minimize_lod(const ComplexField &initial, const LodBasis &basis,
                            const GlSystem &fine_system, const SolverConfig &config = {});

// For each coarse level: LOD minimizer and LOD Ritz projection of the reference, measured
// against the reference on its mesh. The bestapprox columns hold the projection errors.
std::vector<ConvergenceRecord> lod_study(const ReferenceSolution &ref,
                                         const std::vector<int> &coarse_levels,
                                         const SolverConfig &config);

// Least-squares slope of log(error) over log(h).
double fitted_order(const std::vector<double> &h, const std::vector<double> &errors);

}  // namespace glfem

#endif  // GLFEM_LOD_HPP
