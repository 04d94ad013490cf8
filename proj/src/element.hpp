// SPDX-License-Identifier: Apache-2.0

// Per-triangle P1 geometry shared by the assembly and norm routines.

#ifndef GLFEM_SRC_ELEMENT_HPP
#define GLFEM_SRC_ELEMENT_HPP

#include <array>
#include <Eigen/Core>
#include "glfem/mesh.hpp"

namespace glfem::detail
{

struct P1Element
{
  std::array<int, 3> nodes;
  double area;
  // Row a holds the (constant) gradient of the hat function of local node a.
  Eigen::Matrix<double, 3, 2> grad;
  Eigen::Vector2d p0, e1, e2;

  Eigen::Vector2d point(const Eigen::Vector3d &bary) const
  {
    return p0 + bary(1) * e1 + bary(2) * e2;
  }
};

inline P1Element element(const Mesh2D &mesh, Eigen::Index t)
{
  P1Element el;
  const auto &tri = mesh.triangles();
  const auto &xy = mesh.nodes();
  for (int a = 0; a < 3; ++a)
  {
    el.nodes[a] = tri(t, a);
  }
  el.p0 = xy.row(el.nodes[0]).transpose();
  el.e1 = xy.row(el.nodes[1]).transpose() - el.p0;
  el.e2 = xy.row(el.nodes[2]).transpose() - el.p0;
  const double det = el.e1(0) * el.e2(1) - el.e2(0) * el.e1(1);
  el.area = 0.5 * det;
  // Gradients of the barycentric coordinates: inverse Jacobian transposed.
  el.grad(1, 0) = el.e2(1) / det;
  el.grad(1, 1) = -el.e2(0) / det;
  el.grad(2, 0) = -el.e1(1) / det;
  el.grad(2, 1) = el.e1(0) / det;
  el.grad.row(0) = -el.grad.row(1) - el.grad.row(2);
  return el;
}

}  // namespace glfem::detail

#endif  // GLFEM_SRC_ELEMENT_HPP
