// SPDX-License-Identifier: Apache-2.0

#include "glfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include "element.hpp"

namespace glfem
{

namespace
{

using Local = Eigen::Matrix<double, 6, 6>;
using Triplets = std::vector<Eigen::Triplet<double>>;

struct NodalValues
{
  Eigen::Vector3d re, im;
};

NodalValues gather(const detail::P1Element &el, const Eigen::VectorXd &c, Eigen::Index n)
{
  NodalValues v;
  for (int a = 0; a < 3; ++a)
  {
    v.re(a) = c(el.nodes[a]);
    v.im(a) = c(n + el.nodes[a]);
  }
  return v;
}

Eigen::Matrix3d local_mass(const detail::P1Element &el, const QuadratureRule &rule)
{
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (Eigen::Index q = 0; q < rule.size(); ++q)
  {
    const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
    const double w = 2.0 * el.area * rule.weights(q);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = a; b < 3; ++b)
      {
        m(a, b) += w * (lam(a) * lam(b));
      }
    }
  }
  return m.selfadjointView<Eigen::Upper>();
}

// Element matrix of a_A in local order (re0, re1, re2, im0, im1, im2).
Local local_magnetic_form(const detail::P1Element &el, const Problem &problem)
{
  const QuadratureRule &rule = problem.quad;
  const double kappa = problem.kappa;
  Eigen::Matrix3d mass_a2 = Eigen::Matrix3d::Zero(), cross = Eigen::Matrix3d::Zero();
  for (Eigen::Index q = 0; q < rule.size(); ++q)
  {
    const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
    const Eigen::Vector2d x = el.point(lam);
    const Eigen::Vector2d A = problem.potential(x(0), x(1));
    const double w = 2.0 * el.area * rule.weights(q);
    const Eigen::Vector3d a_dot_grad = el.grad * A;
    const double wa2 = w * A.squaredNorm();
    for (int a = 0; a < 3; ++a)
    {
      for (int b = a; b < 3; ++b)
      {
        mass_a2(a, b) += wa2 * (lam(a) * lam(b));
      }
      for (int b = a + 1; b < 3; ++b)
      {
        cross(a, b) += w * (lam(a) * a_dot_grad(b) - lam(b) * a_dot_grad(a));
      }
    }
  }
  Local K = Local::Zero();
  for (int a = 0; a < 3; ++a)
  {
    for (int b = a; b < 3; ++b)
    {
      const double g = el.grad(a, 0) * el.grad(b, 0) + el.grad(a, 1) * el.grad(b, 1);
      const double v = el.area * g + kappa * kappa * mass_a2(a, b);
      K(a, b) = K(b, a) = v;
      K(3 + a, 3 + b) = K(3 + b, 3 + a) = v;
    }
    for (int b = 0; b < 3; ++b)
    {
      // cross is antisymmetric: cross(b, a) = -cross(a, b).
      const double c = a < b ? cross(a, b) : (a > b ? -cross(b, a) : 0.0);
      K(a, 3 + b) = kappa * c;  // real test a, imag trial b
      K(3 + b, a) = kappa * c;
    }
  }
  return K;
}

// kappa^2 times the second derivative of the quartic term, local layout as above.
Local local_nonlinear_hessian(const detail::P1Element &el, const NodalValues &u,
                              const Problem &problem)
{
  const QuadratureRule &rule = problem.quad;
  const double k2 = problem.kappa * problem.kappa;
  Local H = Local::Zero();
  for (Eigen::Index q = 0; q < rule.size(); ++q)
  {
    const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
    const double w = 2.0 * el.area * rule.weights(q);
    const double p = lam.dot(u.re), s = lam.dot(u.im);
    const double crr = w * k2 * (3.0 * p * p + s * s - 1.0);
    const double cii = w * k2 * (p * p + 3.0 * s * s - 1.0);
    const double cri = w * k2 * 2.0 * p * s;
    for (int a = 0; a < 3; ++a)
    {
      for (int b = a; b < 3; ++b)
      {
        const double ll = lam(a) * lam(b);
        H(a, b) += crr * ll;
        H(3 + a, 3 + b) += cii * ll;
        H(a, 3 + b) += cri * ll;
        if (b != a)
        {
          H(b, 3 + a) += cri * ll;
        }
      }
    }
  }
  for (int a = 0; a < 6; ++a)
  {
    for (int b = 0; b < a; ++b)
    {
      H(a, b) = H(b, a);
    }
  }
  return H;
}

Eigen::Matrix3d local_weighted_mass(const detail::P1Element &el, const NodalValues &u,
                                    const QuadratureRule &rule)
{
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (Eigen::Index q = 0; q < rule.size(); ++q)
  {
    const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
    const double p = lam.dot(u.re), s = lam.dot(u.im);
    const double w = 2.0 * el.area * rule.weights(q) * (p * p + s * s);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = a; b < 3; ++b)
      {
        m(a, b) += w * (lam(a) * lam(b));
      }
    }
  }
  return m.selfadjointView<Eigen::Upper>();
}

// Nonlinear residual contribution kappa^2 int (|u|^2 - 1) u conj(phi) and quartic energy term.
void local_nonlinear_terms(const detail::P1Element &el, const NodalValues &u,
                           const Problem &problem, Eigen::Matrix<double, 6, 1> *res,
                           double *quartic)
{
  const QuadratureRule &rule = problem.quad;
  const double k2 = problem.kappa * problem.kappa;
  for (Eigen::Index q = 0; q < rule.size(); ++q)
  {
    const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
    const double w = 2.0 * el.area * rule.weights(q);
    const double p = lam.dot(u.re), s = lam.dot(u.im);
    const double d = p * p + s * s - 1.0;
    if (res)
    {
      res->head<3>() += (w * k2 * d * p) * lam;
      res->tail<3>() += (w * k2 * d * s) * lam;
    }
    if (quartic)
    {
      *quartic += w * 0.25 * k2 * d * d;
    }
  }
}

void scatter(const detail::P1Element &el, const Local &K, Eigen::Index n, Triplets blocks[4])
{
  for (int a = 0; a < 3; ++a)
  {
    for (int b = 0; b < 3; ++b)
    {
      const int j = el.nodes[a], k = el.nodes[b];
      blocks[0].emplace_back(j, k, K(a, b));
      blocks[1].emplace_back(j, k, K(a, 3 + b));
      blocks[2].emplace_back(j, k, K(3 + a, b));
      blocks[3].emplace_back(j, k, K(3 + a, 3 + b));
    }
  }
  (void)n;
}

BlockOperator build_blocks(Triplets blocks[4], Eigen::Index n)
{
  BlockOperator op;
  SparseMatrix *targets[4] = {&op.rr, &op.ir, &op.ri, &op.ii};
  for (int b = 0; b < 4; ++b)
  {
    targets[b]->resize(n, n);
    targets[b]->setFromTriplets(blocks[b].begin(), blocks[b].end());
  }
  return op;
}

}  // namespace

Potential Potential::paper()
{
  return {PotentialKind::Paper, std::sqrt(2.0)};
}

Potential Potential::zero()
{
  return {PotentialKind::Zero, 0.0};
}

std::string Potential::name() const
{
  return kind_ == PotentialKind::Paper ? "paper" : "zero";
}

Eigen::Vector2d Potential::operator()(double x, double y) const
{
  if (kind_ == PotentialKind::Zero)
  {
    return Eigen::Vector2d::Zero();
  }
  constexpr double pi = std::numbers::pi;
  const double s = std::numbers::sqrt2;
  return {s * std::sin(pi * x) * std::cos(pi * y), -s * std::cos(pi * x) * std::sin(pi * y)};
}

double Potential::divergence(double x, double y) const
{
  if (kind_ == PotentialKind::Zero)
  {
    return 0.0;
  }
  constexpr double pi = std::numbers::pi;
  const double s = std::numbers::sqrt2;
  return s * pi * std::cos(pi * x) * std::cos(pi * y) - s * pi * std::cos(pi * x) * std::cos(pi * y);
}

Problem::Problem(double kappa_, Potential potential_, int quad_degree)
  : kappa(kappa_), potential(potential_),
    beta_sq(kappa_ * kappa_ * (potential_.a_inf() * potential_.a_inf() + 1.0)),
    quad(quadrature(quad_degree))
{
  if (!(kappa >= 0.0) || !std::isfinite(kappa))
  {
    throw std::invalid_argument("Problem: kappa must be finite and nonnegative");
  }
}

SparseMatrix BlockOperator::full() const
{
  const Eigen::Index n = rr.rows();
  Triplets t;
  t.reserve(rr.nonZeros() + ir.nonZeros() + ri.nonZeros() + ii.nonZeros());
  const SparseMatrix *blocks[4] = {&rr, &ir, &ri, &ii};
  const Eigen::Index row_off[4] = {0, 0, n, n}, col_off[4] = {0, n, 0, n};
  for (int b = 0; b < 4; ++b)
  {
    for (Eigen::Index k = 0; k < blocks[b]->outerSize(); ++k)
    {
      for (SparseMatrix::InnerIterator it(*blocks[b], k); it; ++it)
      {
        t.emplace_back(it.row() + row_off[b], it.col() + col_off[b], it.value());
      }
    }
  }
  SparseMatrix A(2 * n, 2 * n);
  A.setFromTriplets(t.begin(), t.end());
  return A;
}

BlockOperator BlockOperator::from_full(const SparseMatrix &full)
{
  const Eigen::Index n = full.rows() / 2;
  if (full.rows() != 2 * n || full.cols() != 2 * n)
  {
    throw std::invalid_argument("BlockOperator: full matrix must be square of even size");
  }
  BlockOperator op;
  op.rr = full.topLeftCorner(n, n);
  op.ir = full.topRightCorner(n, n);
  op.ri = full.bottomLeftCorner(n, n);
  op.ii = full.bottomRightCorner(n, n);
  return op;
}

Eigen::VectorXd BlockOperator::apply(const Eigen::VectorXd &v) const
{
  const Eigen::Index n = rr.rows();
  Eigen::VectorXd out(2 * n);
  out.head(n) = rr * v.head(n) + ir * v.tail(n);
  out.tail(n) = ri * v.head(n) + ii * v.tail(n);
  return out;
}

SparseMatrix mass_matrix(const Mesh2D &mesh, const QuadratureRule &rule)
{
  Triplets t;
  t.reserve(9 * mesh.num_triangles());
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    const Eigen::Matrix3d m = local_mass(el, rule);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = 0; b < 3; ++b)
      {
        t.emplace_back(el.nodes[a], el.nodes[b], m(a, b));
      }
    }
  }
  SparseMatrix M(mesh.num_nodes(), mesh.num_nodes());
  M.setFromTriplets(t.begin(), t.end());
  return M;
}

SparseMatrix stiffness_matrix(const Mesh2D &mesh)
{
  Triplets t;
  t.reserve(9 * mesh.num_triangles());
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = 0; b < 3; ++b)
      {
        const double g = el.grad(a, 0) * el.grad(b, 0) + el.grad(a, 1) * el.grad(b, 1);
        t.emplace_back(el.nodes[a], el.nodes[b], el.area * g);
      }
    }
  }
  SparseMatrix K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

SparseMatrix block_diagonal(const SparseMatrix &m)
{
  const Eigen::Index r = m.rows(), c = m.cols();
  Triplets t;
  t.reserve(2 * m.nonZeros());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
    {
      t.emplace_back(it.row(), it.col(), it.value());
      t.emplace_back(it.row() + r, it.col() + c, it.value());
    }
  }
  SparseMatrix out(2 * r, 2 * c);
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

BlockOperator assemble_aA(const Problem &problem, const Mesh2D &mesh)
{
  Triplets blocks[4];
  for (auto &b : blocks)
  {
    b.reserve(9 * mesh.num_triangles());
  }
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    scatter(el, local_magnetic_form(el, problem), mesh.num_nodes(), blocks);
  }
  return build_blocks(blocks, mesh.num_nodes());
}

BlockOperator assemble_ahat(const Problem &problem, const Mesh2D &mesh)
{
  BlockOperator op = assemble_aA(problem, mesh);
  const SparseMatrix M = mass_matrix(mesh, problem.quad);
  op.rr += problem.beta_sq * M;
  op.ii += problem.beta_sq * M;
  return op;
}

SparseMatrix weighted_mass(const ComplexField &u, const QuadratureRule &rule)
{
  const Mesh2D &mesh = u.mesh();
  const Eigen::VectorXd c = u.coefficients();
  Triplets t;
  t.reserve(9 * mesh.num_triangles());
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    const Eigen::Matrix3d m = local_weighted_mass(el, gather(el, c, mesh.num_nodes()), rule);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = 0; b < 3; ++b)
      {
        t.emplace_back(el.nodes[a], el.nodes[b], m(a, b));
      }
    }
  }
  SparseMatrix W(mesh.num_nodes(), mesh.num_nodes());
  W.setFromTriplets(t.begin(), t.end());
  return W;
}

double energy(const ComplexField &u, const Problem &problem)
{
  const Mesh2D &mesh = u.mesh();
  const QuadratureRule &rule = problem.quad;
  const double kappa = problem.kappa, k2 = kappa * kappa;
  const Eigen::VectorXd c = u.coefficients();
  double total = 0.0;
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    const NodalValues v = gather(el, c, mesh.num_nodes());
    const Eigen::Vector2d gp = el.grad.transpose() * v.re, gs = el.grad.transpose() * v.im;
    for (Eigen::Index q = 0; q < rule.size(); ++q)
    {
      const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
      const Eigen::Vector2d x = el.point(lam);
      const Eigen::Vector2d A = problem.potential(x(0), x(1));
      const double p = lam.dot(v.re), s = lam.dot(v.im);
      // grad u + i kappa A u = (grad p - kappa A s) + i (grad s + kappa A p)
      const double kinetic = (gp - kappa * s * A).squaredNorm() + (gs + kappa * p * A).squaredNorm();
      const double d = 1.0 - p * p - s * s;
      total += 2.0 * el.area * rule.weights(q) * (0.5 * kinetic + 0.25 * k2 * d * d);
    }
  }
  return total;
}

Eigen::VectorXd residual(const ComplexField &u, const Problem &problem)
{
  const Mesh2D &mesh = u.mesh();
  const Eigen::Index n = mesh.num_nodes();
  const Eigen::VectorXd c = u.coefficients();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(2 * n);
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    const NodalValues v = gather(el, c, n);
    Eigen::Matrix<double, 6, 1> local;
    local << v.re, v.im;
    Eigen::Matrix<double, 6, 1> res = local_magnetic_form(el, problem) * local;
    local_nonlinear_terms(el, v, problem, &res, nullptr);
    for (int a = 0; a < 3; ++a)
    {
      r(el.nodes[a]) += res(a);
      r(n + el.nodes[a]) += res(3 + a);
    }
  }
  return r;
}

BlockOperator hessian(const ComplexField &u, const Problem &problem)
{
  const Mesh2D &mesh = u.mesh();
  const Eigen::VectorXd c = u.coefficients();
  Triplets blocks[4];
  for (auto &b : blocks)
  {
    b.reserve(9 * mesh.num_triangles());
  }
  for (Eigen::Index e = 0; e < mesh.num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(mesh, e);
    const NodalValues v = gather(el, c, mesh.num_nodes());
    scatter(el, local_magnetic_form(el, problem) + local_nonlinear_hessian(el, v, problem),
            mesh.num_nodes(), blocks);
  }
  return build_blocks(blocks, mesh.num_nodes());
}

GlSystem::GlSystem(Problem problem, MeshPtr mesh)
  : problem_(std::move(problem)), mesh_(std::move(mesh))
{
  const Eigen::Index n = mesh_->num_nodes();
  const Eigen::Index ntri = mesh_->num_triangles();
  Triplets t;
  t.reserve(36 * ntri);
  for (Eigen::Index e = 0; e < ntri; ++e)
  {
    for (int a = 0; a < 6; ++a)
    {
      for (int b = 0; b < 6; ++b)
      {
        const Eigen::Index row = mesh_->triangles()(e, a % 3) + (a / 3) * n;
        const Eigen::Index col = mesh_->triangles()(e, b % 3) + (b / 3) * n;
        t.emplace_back(row, col, 0.0);
      }
    }
  }
  pattern_.resize(2 * n, 2 * n);
  pattern_.setFromTriplets(t.begin(), t.end());
  pattern_.makeCompressed();
  offsets_.resize(36 * ntri);
  const int *outer = pattern_.outerIndexPtr();
  const int *inner = pattern_.innerIndexPtr();
  for (std::size_t k = 0; k < t.size(); ++k)
  {
    const int row = t[k].row(), col = t[k].col();
    const int *pos = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
    offsets_[k] = static_cast<int>(pos - inner);
  }
  mass_block_ = assemble(Kernel::Mass, nullptr);
  mass_ = mass_block_.topLeftCorner(n, n);
  aA_ = assemble(Kernel::MagneticForm, nullptr);
}

SparseMatrix GlSystem::assemble(Kernel kernel, const Eigen::VectorXd *c) const
{
  SparseMatrix out = pattern_;
  double *values = out.valuePtr();
  const Eigen::Index n = mesh_->num_nodes();
  for (Eigen::Index e = 0; e < mesh_->num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(*mesh_, e);
    Local K = Local::Zero();
    switch (kernel)
    {
      case Kernel::Mass:
      {
        const Eigen::Matrix3d m = local_mass(el, problem_.quad);
        K.topLeftCorner<3, 3>() = m;
        K.bottomRightCorner<3, 3>() = m;
        break;
      }
      case Kernel::MagneticForm:
        K = local_magnetic_form(el, problem_);
        break;
      case Kernel::Weighted:
      {
        const Eigen::Matrix3d m = local_weighted_mass(el, gather(el, *c, n), problem_.quad);
        K.topLeftCorner<3, 3>() = m;
        K.bottomRightCorner<3, 3>() = m;
        break;
      }
      case Kernel::Hessian:
        K = local_nonlinear_hessian(el, gather(el, *c, n), problem_);
        break;
    }
    const int *off = offsets_.data() + 36 * e;
    for (int a = 0; a < 6; ++a)
    {
      for (int b = 0; b < 6; ++b)
      {
        values[off[6 * a + b]] += K(a, b);
      }
    }
  }
  return out;
}

SparseMatrix GlSystem::weighted_mass_block(const Eigen::VectorXd &c) const
{
  return assemble(Kernel::Weighted, &c);
}

SparseMatrix GlSystem::hessian(const Eigen::VectorXd &c) const
{
  SparseMatrix H = assemble(Kernel::Hessian, &c);
  // Same pattern: add values in place.
  Eigen::Map<Eigen::VectorXd>(H.valuePtr(), H.nonZeros()) +=
      Eigen::Map<const Eigen::VectorXd>(aA_.valuePtr(), aA_.nonZeros());
  return H;
}

double GlSystem::energy(const Eigen::VectorXd &c) const
{
  const Eigen::Index n = mesh_->num_nodes();
  double quartic = 0.0;
  for (Eigen::Index e = 0; e < mesh_->num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(*mesh_, e);
    local_nonlinear_terms(el, gather(el, c, n), problem_, nullptr, &quartic);
  }
  return 0.5 * c.dot(aA_ * c) + quartic;
}

Eigen::VectorXd GlSystem::residual(const Eigen::VectorXd &c) const
{
  const Eigen::Index n = mesh_->num_nodes();
  Eigen::VectorXd r = aA_ * c;
  for (Eigen::Index e = 0; e < mesh_->num_triangles(); ++e)
  {
    const detail::P1Element el = detail::element(*mesh_, e);
    Eigen::Matrix<double, 6, 1> res = Eigen::Matrix<double, 6, 1>::Zero();
    local_nonlinear_terms(el, gather(el, c, n), problem_, &res, nullptr);
    for (int a = 0; a < 3; ++a)
    {
      r(el.nodes[a]) += res(a);
      r(n + el.nodes[a]) += res(3 + a);
    }
  }
  return r;
}

double GlSystem::ahat_norm(const Eigen::VectorXd &c) const
{
  return std::sqrt(std::max(0.0, c.dot(aA_ * c) + problem_.beta_sq * c.dot(mass_block_ * c)));
}

}  // namespace glfem
