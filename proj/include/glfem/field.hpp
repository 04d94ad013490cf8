// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_FIELD_HPP
#define GLFEM_FIELD_HPP

#include <complex>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <Eigen/Core>
#include <Eigen/SparseCore>
#include "glfem/mesh.hpp"

namespace glfem
{

using SparseMatrix = Eigen::SparseMatrix<double>;
using MeshPtr = std::shared_ptr<const Mesh2D>;

inline MeshPtr make_mesh(int n)
{
  return std::make_shared<const Mesh2D>(build_uniform(n));
}

//
// Complex P1 function u_h = sum_j (re_j + i im_j) phi_j. The real coefficient vector used by
// all block operators is the stacked [re; im] of length 2N.
//
class ComplexField
{
public:
  ComplexField() = default;
  ComplexField(MeshPtr mesh, Eigen::VectorXd re, Eigen::VectorXd im);

  static ComplexField zero(MeshPtr mesh);
  static ComplexField constant(MeshPtr mesh, std::complex<double> value);
  static ComplexField from_coefficients(MeshPtr mesh, const Eigen::VectorXd &coefficients);

  const Mesh2D &mesh() const { return *mesh_; }
  const MeshPtr &mesh_ptr() const { return mesh_; }
  Eigen::Index size() const { return re_.size(); }

  const Eigen::VectorXd &re() const { return re_; }
  const Eigen::VectorXd &im() const { return im_; }
  std::complex<double> operator()(Eigen::Index node) const { return {re_(node), im_(node)}; }

  Eigen::VectorXd coefficients() const;
  Eigen::VectorXd modulus() const;

  // i * u, whose coefficient vector is [-im; re].
  ComplexField times_i() const;
  // exp(i theta) * u.
  ComplexField rotated(double theta) const;

  ComplexField &operator+=(const ComplexField &other);
  ComplexField &operator-=(const ComplexField &other);
  ComplexField &operator*=(double s);

private:
  MeshPtr mesh_;
  Eigen::VectorXd re_, im_;
};

ComplexField operator+(ComplexField a, const ComplexField &b);
ComplexField operator-(ComplexField a, const ComplexField &b);
ComplexField operator*(double s, ComplexField a);

struct NormReport
{
  double l2 = 0.0;
  double h1_semi = 0.0;
  double hk1 = 0.0;
  std::map<int, double> lp;  // p in {3, 4, 6}
};

// Nodal interpolation of a pointwise complex function. Throws std::domain_error on a
// non-finite value.
ComplexField interpolate(const std::function<std::complex<double>(double, double)> &f,
                         MeshPtr mesh);

// Interpolation matrix from coarse to fine P1 nodal values (exact embedding). Throws
// NotNestedError unless fine is a refinement of coarse.
SparseMatrix prolongation_matrix(const Mesh2D &coarse, const Mesh2D &fine);

ComplexField prolong(const ComplexField &u, MeshPtr fine);

// Coarse nodal values copied from the coincident fine nodes.
ComplexField restrict_interpolate(const ComplexField &u_fine, MeshPtr coarse);

// L2, H1 seminorm and H^1_kappa norm integrate P1 data exactly; the L^p entries apply the
// degree-5 rule to |u_h|^p (exact for p = 4 only).
NormReport norms(const ComplexField &u, double kappa);

// Complex L2 product int u conj(v) dx. Its real part is the real inner product m(u, v).
std::complex<double> complex_inner(const ComplexField &u, const ComplexField &v);

struct PhaseAlignment
{
  double phi = 0.0;
  ComplexField aligned;
};

// exp(i phi) u with m(exp(i phi) u, i v_ref) = 0 and m(exp(i phi) u, v_ref) >= 0, i.e.
// phi = -arg int u conj(v_ref) dx. Throws AlignmentUndefined when that integral vanishes.
PhaseAlignment align_phase(const ComplexField &u, const ComplexField &v_ref);

// Line-oriented field file: "n=<int> kappa=<float>" then "index,x,y,re,im" per node.
// Numbers use the shortest representation that reads back to the identical double.
void write_field(const std::string &path, const ComplexField &u, double kappa);

struct FieldFile
{
  ComplexField field;
  double kappa = 0.0;
};

FieldFile read_field(const std::string &path);

}  // namespace glfem

#endif  // GLFEM_FIELD_HPP
