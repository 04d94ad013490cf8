// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_ASSEMBLY_HPP
#define GLFEM_ASSEMBLY_HPP

#include <string>
#include <vector>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include "glfem/field.hpp"
#include "glfem/mesh.hpp"

namespace glfem
{

enum class PotentialKind
{
  Paper,
  Zero
};

//
// Magnetic vector potential, divergence free with vanishing normal trace on the unit square.
// The default potential is A(x, y) = sqrt(2) (sin(pi x) cos(pi y), -cos(pi x) sin(pi y)).
//
class Potential
{
public:
  static Potential paper();
  static Potential zero();

  PotentialKind kind() const { return kind_; }
  // Analytic sup-norm bound |A|_inf.
  double a_inf() const { return a_inf_; }
  std::string name() const;

  Eigen::Vector2d operator()(double x, double y) const;
  double divergence(double x, double y) const;

private:
  Potential(PotentialKind kind, double a_inf) : kind_(kind), a_inf_(a_inf) {}

  PotentialKind kind_;
  double a_inf_;
};

struct Problem
{
  Problem(double kappa, Potential potential = Potential::paper(), int quad_degree = 5);

  double kappa;
  Potential potential;
  double beta_sq;  // kappa^2 (a_inf^2 + 1)
  QuadratureRule quad;
};

//
// 2N x 2N real representation of a real-bilinear form on complex P1 functions in the basis
// {phi_j} u {i phi_j}:
//
//   [ rr  ir ] [v_re]     rr: real test / real trial      ir: real test / imag trial
//   [ ri  ii ] [v_im]     ri: imag test / real trial      ii: imag test / imag trial
//
struct BlockOperator
{
  SparseMatrix rr, ir, ri, ii;

  Eigen::Index n() const { return rr.rows(); }
  SparseMatrix full() const;
  static BlockOperator from_full(const SparseMatrix &full);

  Eigen::VectorXd apply(const Eigen::VectorXd &v) const;
  double quadratic_form(const Eigen::VectorXd &v) const { return v.dot(apply(v)); }
};

SparseMatrix mass_matrix(const Mesh2D &mesh, const QuadratureRule &rule = quadrature(5));
SparseMatrix stiffness_matrix(const Mesh2D &mesh);
// diag(m, m).
SparseMatrix block_diagonal(const SparseMatrix &m);

// a_A(u, phi) = Re int (grad u + i kappa A u) . conj(grad phi + i kappa A phi).
BlockOperator assemble_aA(const Problem &problem, const Mesh2D &mesh);
// a_A + beta^2 m, coercive in the H^1_kappa norm.
BlockOperator assemble_ahat(const Problem &problem, const Mesh2D &mesh);

// W_jk = int |u|^2 phi_k phi_j dx.
SparseMatrix weighted_mass(const ComplexField &u, const QuadratureRule &rule = quadrature(5));

// E(u) = 1/2 int |grad u + i kappa A u|^2 + kappa^2/2 (1 - |u|^2)^2 dx, evaluated pointwise at
// the quadrature nodes (independent of any assembled matrix).
double energy(const ComplexField &u, const Problem &problem);

// Entries <E'(u), phi_j> followed by <E'(u), i phi_j>.
Eigen::VectorXd residual(const ComplexField &u, const Problem &problem);

// Block matrix of E''(u).
BlockOperator hessian(const ComplexField &u, const Problem &problem);

//
// Cached assembly on one mesh for repeated evaluations inside the solvers. Every matrix it
// returns is 2N x 2N in the full block layout and shares one sparsity pattern (mesh
// connectivity in all four blocks, explicit zeros kept), so linear combinations preserve the
// pattern and a symbolic factorization can be reused.
//
class GlSystem
{
public:
  GlSystem(Problem problem, MeshPtr mesh);

  const Problem &problem() const { return problem_; }
  const MeshPtr &mesh_ptr() const { return mesh_; }
  const Mesh2D &mesh() const { return *mesh_; }
  double kappa() const { return problem_.kappa; }
  Eigen::Index dofs() const { return 2 * mesh_->num_nodes(); }

  const SparseMatrix &mass() const { return mass_; }  // N x N
  const SparseMatrix &mass_block() const { return mass_block_; }
  const SparseMatrix &aA() const { return aA_; }
  SparseMatrix ahat() const { return aA_ + problem_.beta_sq * mass_block_; }

  SparseMatrix weighted_mass_block(const Eigen::VectorXd &c) const;
  SparseMatrix hessian(const Eigen::VectorXd &c) const;
  double energy(const Eigen::VectorXd &c) const;
  Eigen::VectorXd residual(const Eigen::VectorXd &c) const;

  // a-hat_kappa norm sqrt(c^T (A_A + beta^2 M) c).
  double ahat_norm(const Eigen::VectorXd &c) const;
  // Real inner product m(u, v) of coefficient vectors.
  double m(const Eigen::VectorXd &u, const Eigen::VectorXd &v) const { return u.dot(mass_block_ * v); }

private:
  enum class Kernel
  {
    Mass,
    MagneticForm,
    Weighted,
    Hessian
  };
  SparseMatrix assemble(Kernel kernel, const Eigen::VectorXd *c) const;

  Problem problem_;
  MeshPtr mesh_;
  SparseMatrix pattern_;              // 2N x 2N, values zero
  std::vector<int> offsets_;          // 36 value offsets per triangle
  SparseMatrix mass_, mass_block_, aA_;
};

}  // namespace glfem

#endif  // GLFEM_ASSEMBLY_HPP
