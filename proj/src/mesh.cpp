// SPDX-License-Identifier: Apache-2.0

#include "glfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace glfem
{

QuadratureRule quadrature(int degree)
{
  QuadratureRule rule;
  rule.degree = degree;
  switch (degree)
  {
    case 1:
      rule.barycentric.resize(1, 3);
      rule.barycentric << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
      rule.weights.setConstant(1, 0.5);
      break;
    case 2:
      rule.barycentric.resize(3, 3);
      rule.barycentric << 2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0,  //
          1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0,                 //
          1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0;
      rule.weights.setConstant(3, 1.0 / 6.0);
      break;
    case 5:
    {
      const double s15 = std::sqrt(15.0);
      const double a = (6.0 - s15) / 21.0, b = (6.0 + s15) / 21.0;
      const double wa = (155.0 - s15) / 2400.0, wb = (155.0 + s15) / 2400.0;
      rule.barycentric.resize(7, 3);
      rule.barycentric << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0,  //
          a, a, 1.0 - 2.0 * a,                             //
          a, 1.0 - 2.0 * a, a,                             //
          1.0 - 2.0 * a, a, a,                             //
          b, b, 1.0 - 2.0 * b,                             //
          b, 1.0 - 2.0 * b, b,                             //
          1.0 - 2.0 * b, b, b;
      rule.weights.resize(7);
      rule.weights << 9.0 / 80.0, wa, wa, wa, wb, wb, wb;
      break;
    }
    default:
      throw std::invalid_argument("quadrature: unsupported degree " + std::to_string(degree) +
                                  " (supported: 1, 2, 5)");
  }
  return rule;
}

double Mesh2D::signed_area(Eigen::Index t) const
{
  const auto p0 = nodes_.row(triangles_(t, 0));
  const auto p1 = nodes_.row(triangles_(t, 1));
  const auto p2 = nodes_.row(triangles_(t, 2));
  return 0.5 * ((p1(0) - p0(0)) * (p2(1) - p0(1)) - (p2(0) - p0(0)) * (p1(1) - p0(1)));
}

Eigen::Index Mesh2D::locate(double x, double y) const
{
  const int i = std::clamp(static_cast<int>(std::floor(x * n_)), 0, n_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(y * n_)), 0, n_ - 1);
  // Local coordinates inside square (i, j); the lower triangle satisfies dy <= dx.
  const double dx = x * n_ - i, dy = y * n_ - j;
  return 2 * (static_cast<Eigen::Index>(j) * n_ + i) + (dy > dx ? 1 : 0);
}

Eigen::Vector3d Mesh2D::barycentric(Eigen::Index t, double x, double y) const
{
  const auto p0 = nodes_.row(triangles_(t, 0));
  const auto p1 = nodes_.row(triangles_(t, 1));
  const auto p2 = nodes_.row(triangles_(t, 2));
  const double det = (p1(0) - p0(0)) * (p2(1) - p0(1)) - (p2(0) - p0(0)) * (p1(1) - p0(1));
  const double l1 = ((x - p0(0)) * (p2(1) - p0(1)) - (p2(0) - p0(0)) * (y - p0(1))) / det;
  const double l2 = ((p1(0) - p0(0)) * (y - p0(1)) - (x - p0(0)) * (p1(1) - p0(1))) / det;
  return {1.0 - l1 - l2, l1, l2};
}

Mesh2D build_uniform(int n)
{
  if (n < 1)
  {
    throw std::invalid_argument("build_uniform: need at least one cell per side, got " +
                                std::to_string(n));
  }
  Mesh2D mesh;
  mesh.n_ = n;
  mesh.level_ = 0;
  mesh.nodes_.resize(static_cast<Eigen::Index>(n + 1) * (n + 1), 2);
  for (int j = 0; j <= n; ++j)
  {
    for (int i = 0; i <= n; ++i)
    {
      const int k = mesh.node_index(i, j);
      mesh.nodes_(k, 0) = static_cast<double>(i) / n;
      mesh.nodes_(k, 1) = static_cast<double>(j) / n;
      if (i == 0 || j == 0 || i == n || j == n)
      {
        mesh.boundary_.push_back(k);
      }
    }
  }
  mesh.triangles_.resize(2 * static_cast<Eigen::Index>(n) * n, 3);
  for (int j = 0; j < n; ++j)
  {
    for (int i = 0; i < n; ++i)
    {
      const int p00 = mesh.node_index(i, j), p10 = mesh.node_index(i + 1, j);
      const int p01 = mesh.node_index(i, j + 1), p11 = mesh.node_index(i + 1, j + 1);
      const Eigen::Index t = 2 * (static_cast<Eigen::Index>(j) * n + i);
      mesh.triangles_.row(t) << p00, p10, p11;
      mesh.triangles_.row(t + 1) << p00, p11, p01;
    }
  }
  return mesh;
}

Mesh2D refine(const Mesh2D &mesh)
{
  const int n = mesh.subdivisions();
  Mesh2D fine = build_uniform(2 * n);
  fine.level_ = mesh.level() + 1;
  fine.parent_.resize(fine.num_triangles());
  // Fine square (I, J) lies in coarse square (I/2, J/2). Lower coarse triangle (dy <= dx in
  // coarse units) owns the lower halves of the sub-squares on or below the diagonal plus the
  // upper half of the bottom-right sub-square.
  for (int J = 0; J < 2 * n; ++J)
  {
    for (int I = 0; I < 2 * n; ++I)
    {
      const int i = I / 2, j = J / 2, di = I % 2, dj = J % 2;
      const int coarse_square = j * n + i;
      const Eigen::Index t = 2 * (static_cast<Eigen::Index>(J) * 2 * n + I);
      // Lower fine triangle: in coarse upper triangle only for the top-left sub-square.
      fine.parent_[t] = 2 * coarse_square + ((di == 0 && dj == 1) ? 1 : 0);
      // Upper fine triangle: in coarse lower triangle only for the bottom-right sub-square.
      fine.parent_[t + 1] = 2 * coarse_square + ((di == 1 && dj == 0) ? 0 : 1);
    }
  }
  return fine;
}

bool is_refinement_of(const Mesh2D &fine, const Mesh2D &coarse)
{
  const int nf = fine.subdivisions(), nc = coarse.subdivisions();
  if (nc < 1 || nf < nc || nf % nc != 0)
  {
    return false;
  }
  const int ratio = nf / nc;
  return (ratio & (ratio - 1)) == 0;
}

}  // namespace glfem
