// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_MESH_HPP
#define GLFEM_MESH_HPP

#include <vector>
#include <Eigen/Core>

namespace glfem
{

using NodeArray = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;
using TriangleArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Quadrature on the reference triangle (0,0), (1,0), (0,1) in barycentric form. Weights
// are scaled to the reference area 1/2, so a physical integral is 2 * area * sum(w * f).
struct QuadratureRule
{
  int degree = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor> barycentric;
  Eigen::VectorXd weights;

  Eigen::Index size() const { return weights.size(); }
};

// Rule exact for all bivariate polynomials up to the given degree. Supported: 1 (centroid),
// 2 (three interior points), 5 (seven-point Radon rule). Throws std::invalid_argument
// otherwise.
QuadratureRule quadrature(int degree);

//
// Uniform triangulation of the unit square. The n x n grid of squares is split along the
// diagonal (i, j) -> (i + 1, j + 1); node (i, j) has index j * (n + 1) + i and triangle
// 2 * (j * n + i) + {0: lower, 1: upper}. Both triangles are counterclockwise.
//
class Mesh2D
{
public:
  Mesh2D() = default;

  int subdivisions() const { return n_; }
  int level() const { return level_; }
  double h() const { return 1.0 / n_; }

  Eigen::Index num_nodes() const { return nodes_.rows(); }
  Eigen::Index num_triangles() const { return triangles_.rows(); }

  const NodeArray &nodes() const { return nodes_; }
  const TriangleArray &triangles() const { return triangles_; }
  const std::vector<int> &boundary_nodes() const { return boundary_; }

  // Parent triangle on the previous level; empty for level 0.
  const std::vector<int> &parent_map() const { return parent_; }

  int node_index(int i, int j) const { return j * (n_ + 1) + i; }
  double signed_area(Eigen::Index t) const;

  // Index of the triangle containing (x, y); points on shared edges resolve to the lower-left
  // candidate.
  Eigen::Index locate(double x, double y) const;

  // Barycentric coordinates of (x, y) with respect to triangle t.
  Eigen::Vector3d barycentric(Eigen::Index t, double x, double y) const;

  friend Mesh2D build_uniform(int n);
  friend Mesh2D refine(const Mesh2D &mesh);

private:
  int n_ = 0;
  int level_ = 0;
  NodeArray nodes_;
  TriangleArray triangles_;
  std::vector<int> boundary_;
  std::vector<int> parent_;
};

Mesh2D build_uniform(int n);

// Uniform red refinement: doubles n, records the parent of every child triangle.
Mesh2D refine(const Mesh2D &mesh);

// True if fine arises from coarse by zero or more uniform refinements.
bool is_refinement_of(const Mesh2D &fine, const Mesh2D &coarse);

}  // namespace glfem

#endif  // GLFEM_MESH_HPP
