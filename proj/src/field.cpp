// SPDX-License-Identifier: Apache-2.0

#include "glfem/field.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>
#include "element.hpp"
#include "glfem/errors.hpp"
#include "glfem/io.hpp"

namespace glfem
{

ComplexField::ComplexField(MeshPtr mesh, Eigen::VectorXd re, Eigen::VectorXd im)
  : mesh_(std::move(mesh)), re_(std::move(re)), im_(std::move(im))
{
  if (!mesh_)
  {
    throw std::invalid_argument("ComplexField: null mesh");
  }
  if (re_.size() != mesh_->num_nodes() || im_.size() != mesh_->num_nodes())
  {
    throw std::invalid_argument("ComplexField: coefficient length does not match node count");
  }
  if (!re_.allFinite() || !im_.allFinite())
  {
    throw std::domain_error("ComplexField: non-finite nodal value");
  }
}

ComplexField ComplexField::zero(MeshPtr mesh)
{
  const auto n = mesh->num_nodes();
  return {std::move(mesh), Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)};
}

ComplexField ComplexField::constant(MeshPtr mesh, std::complex<double> value)
{
  const auto n = mesh->num_nodes();
  return {std::move(mesh), Eigen::VectorXd::Constant(n, value.real()),
          Eigen::VectorXd::Constant(n, value.imag())};
}

ComplexField ComplexField::from_coefficients(MeshPtr mesh, const Eigen::VectorXd &coefficients)
{
  const auto n = mesh->num_nodes();
  if (coefficients.size() != 2 * n)
  {
    throw std::invalid_argument("ComplexField: coefficient vector must have length 2N");
  }
  return {std::move(mesh), coefficients.head(n), coefficients.tail(n)};
}

Eigen::VectorXd ComplexField::coefficients() const
{
  Eigen::VectorXd c(2 * size());
  c << re_, im_;
  return c;
}

Eigen::VectorXd ComplexField::modulus() const
{
  return (re_.array().square() + im_.array().square()).sqrt().matrix();
}

ComplexField ComplexField::times_i() const
{
  return {mesh_, -im_, re_};
}

ComplexField ComplexField::rotated(double theta) const
{
  const double c = std::cos(theta), s = std::sin(theta);
  return {mesh_, c * re_ - s * im_, s * re_ + c * im_};
}

ComplexField &ComplexField::operator+=(const ComplexField &other)
{
  if (mesh_ != other.mesh_ && mesh_->subdivisions() != other.mesh().subdivisions())
  {
    throw std::invalid_argument("ComplexField: fields live on different meshes");
  }
  re_ += other.re_;
  im_ += other.im_;
  return *this;
}

ComplexField &ComplexField::operator-=(const ComplexField &other)
{
  return *this += (-1.0) * other;
}

ComplexField &ComplexField::operator*=(double s)
{
  re_ *= s;
  im_ *= s;
  return *this;
}

ComplexField operator+(ComplexField a, const ComplexField &b)
{
  return a += b;
}

ComplexField operator-(ComplexField a, const ComplexField &b)
{
  return a -= b;
}

ComplexField operator*(double s, ComplexField a)
{
  return a *= s;
}

ComplexField interpolate(const std::function<std::complex<double>(double, double)> &f,
                         MeshPtr mesh)
{
  const auto n = mesh->num_nodes();
  Eigen::VectorXd re(n), im(n);
  for (Eigen::Index k = 0; k < n; ++k)
  {
    const std::complex<double> value = f(mesh->nodes()(k, 0), mesh->nodes()(k, 1));
    if (!std::isfinite(value.real()) || !std::isfinite(value.imag()))
    {
      throw std::domain_error("interpolate: non-finite value at node " + std::to_string(k));
    }
    re(k) = value.real();
    im(k) = value.imag();
  }
  return {std::move(mesh), std::move(re), std::move(im)};
}

SparseMatrix prolongation_matrix(const Mesh2D &coarse, const Mesh2D &fine)
{
  if (!is_refinement_of(fine, coarse))
  {
    throw NotNestedError("prolong: n=" + std::to_string(fine.subdivisions()) +
                         " is not a refinement of n=" + std::to_string(coarse.subdivisions()));
  }
  const int nc = coarse.subdivisions(), nf = fine.subdivisions(), r = nf / nc;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(3 * fine.num_nodes());
  for (int J = 0; J <= nf; ++J)
  {
    for (int I = 0; I <= nf; ++I)
    {
      const int row = fine.node_index(I, J);
      const int i = std::min(I / r, nc - 1), j = std::min(J / r, nc - 1);
      const int a = I - i * r, b = J - j * r;
      const double inv = 1.0 / r;
      const int p00 = coarse.node_index(i, j), p11 = coarse.node_index(i + 1, j + 1);
      auto add = [&](int col, int weight)
      {
        if (weight != 0)
        {
          entries.emplace_back(row, col, weight * inv);
        }
      };
      // Integer barycentric weights (times r) on the lower or upper coarse triangle.
      if (b <= a)
      {
        add(p00, r - a);
        add(coarse.node_index(i + 1, j), a - b);
        add(p11, b);
      }
      else
      {
        add(p00, r - b);
        add(coarse.node_index(i, j + 1), b - a);
        add(p11, a);
      }
    }
  }
  SparseMatrix P(fine.num_nodes(), coarse.num_nodes());
  P.setFromTriplets(entries.begin(), entries.end());
  return P;
}

ComplexField prolong(const ComplexField &u, MeshPtr fine)
{
  if (fine->subdivisions() == u.mesh().subdivisions())
  {
    return {std::move(fine), u.re(), u.im()};
  }
  const SparseMatrix P = prolongation_matrix(u.mesh(), *fine);
  Eigen::VectorXd re = P * u.re(), im = P * u.im();
  return {std::move(fine), std::move(re), std::move(im)};
}

ComplexField restrict_interpolate(const ComplexField &u_fine, MeshPtr coarse)
{
  const Mesh2D &fine = u_fine.mesh();
  if (!is_refinement_of(fine, *coarse))
  {
    throw NotNestedError("restrict_interpolate: n=" + std::to_string(coarse->subdivisions()) +
                         " is not an ancestor of n=" + std::to_string(fine.subdivisions()));
  }
  const int nc = coarse->subdivisions(), r = fine.subdivisions() / nc;
  const auto n = coarse->num_nodes();
  Eigen::VectorXd re(n), im(n);
  for (int j = 0; j <= nc; ++j)
  {
    for (int i = 0; i <= nc; ++i)
    {
      const int k = coarse->node_index(i, j), kf = fine.node_index(i * r, j * r);
      re(k) = u_fine.re()(kf);
      im(k) = u_fine.im()(kf);
    }
  }
  return {std::move(coarse), std::move(re), std::move(im)};
}

NormReport norms(const ComplexField &u, double kappa)
{
  if (kappa < 0.0)
  {
    throw std::invalid_argument("norms: kappa must be nonnegative");
  }
  const Mesh2D &mesh = u.mesh();
  const QuadratureRule rule = quadrature(5);
  double l2sq = 0.0, h1sq = 0.0, l3 = 0.0, l4 = 0.0, l6 = 0.0;
  const auto &re = u.re();
  const auto &im = u.im();
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t)
  {
    const detail::P1Element el = detail::element(mesh, t);
    Eigen::Vector3d r, s;
    for (int a = 0; a < 3; ++a)
    {
      r(a) = re(el.nodes[a]);
      s(a) = im(el.nodes[a]);
    }
    // Exact P1 mass: area/12 * (1 + delta_ab).
    const double sum_r = r.sum(), sum_s = s.sum();
    l2sq += el.area / 12.0 * (r.squaredNorm() + sum_r * sum_r + s.squaredNorm() + sum_s * sum_s);
    const Eigen::Vector2d gr = el.grad.transpose() * r, gs = el.grad.transpose() * s;
    h1sq += el.area * (gr.squaredNorm() + gs.squaredNorm());
    for (Eigen::Index q = 0; q < rule.size(); ++q)
    {
      const Eigen::Vector3d lam = rule.barycentric.row(q).transpose();
      const double m2 = std::pow(lam.dot(r), 2) + std::pow(lam.dot(s), 2);
      const double w = 2.0 * el.area * rule.weights(q);
      l3 += w * std::pow(m2, 1.5);
      l4 += w * m2 * m2;
      l6 += w * m2 * m2 * m2;
    }
  }
  NormReport report;
  report.l2 = std::sqrt(l2sq);
  report.h1_semi = std::sqrt(h1sq);
  report.hk1 = std::sqrt(h1sq + kappa * kappa * l2sq);
  report.lp[3] = std::cbrt(l3);
  report.lp[4] = std::sqrt(std::sqrt(l4));
  report.lp[6] = std::pow(l6, 1.0 / 6.0);
  return report;
}

std::complex<double> complex_inner(const ComplexField &u, const ComplexField &v)
{
  if (u.mesh().subdivisions() != v.mesh().subdivisions())
  {
    throw std::invalid_argument("complex_inner: fields live on different meshes");
  }
  const Mesh2D &mesh = u.mesh();
  double real = 0.0, imag = 0.0;
  for (Eigen::Index t = 0; t < mesh.num_triangles(); ++t)
  {
    const detail::P1Element el = detail::element(mesh, t);
    for (int a = 0; a < 3; ++a)
    {
      for (int b = 0; b < 3; ++b)
      {
        const double m = el.area / 12.0 * (a == b ? 2.0 : 1.0);
        const int ja = el.nodes[a], jb = el.nodes[b];
        // (ur + i ui)(vr - i vi)
        real += m * (u.re()(ja) * v.re()(jb) + u.im()(ja) * v.im()(jb));
        imag += m * (u.im()(ja) * v.re()(jb) - u.re()(ja) * v.im()(jb));
      }
    }
  }
  return {real, imag};
}

PhaseAlignment align_phase(const ComplexField &u, const ComplexField &v_ref)
{
  const std::complex<double> c = complex_inner(u, v_ref);
  const double scale = std::sqrt(complex_inner(u, u).real() * complex_inner(v_ref, v_ref).real());
  if (std::abs(c) <= 1e-300 || std::abs(c) <= 1e-15 * scale)
  {
    throw AlignmentUndefined("align_phase: field is orthogonal to the reference");
  }
  const double phi = -std::arg(c);
  return {phi, u.rotated(phi)};
}

void write_field(const std::string &path, const ComplexField &u, double kappa)
{
  std::string out;
  out.reserve(static_cast<std::size_t>(u.size()) * 80);
  out += "n=" + std::to_string(u.mesh().subdivisions()) + " kappa=" + format_double(kappa) + "\n";
  const auto &xy = u.mesh().nodes();
  for (Eigen::Index k = 0; k < u.size(); ++k)
  {
    out += std::to_string(k);
    for (double v : {xy(k, 0), xy(k, 1), u.re()(k), u.im()(k)})
    {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  write_file_atomic(path, out);
}

FieldFile read_field(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw FormatError("cannot open field file '" + path + "'");
  }
  std::string header;
  std::getline(in, header);
  int n = 0;
  double kappa = 0.0;
  {
    std::istringstream hs(header);
    std::string a, b;
    hs >> a >> b;
    if (a.rfind("n=", 0) != 0 || b.rfind("kappa=", 0) != 0)
    {
      throw FormatError(path + ": header must read 'n=<int> kappa=<float>'");
    }
    n = static_cast<int>(parse_double(a.substr(2), "n"));
    kappa = parse_double(b.substr(6), "kappa");
  }
  if (n < 1)
  {
    throw FormatError(path + ": invalid n");
  }
  MeshPtr mesh = make_mesh(n);
  const auto count = mesh->num_nodes();
  Eigen::VectorXd re(count), im(count);
  std::string line;
  Eigen::Index k = 0;
  while (std::getline(in, line))
  {
    if (line.empty())
    {
      continue;
    }
    if (k >= count)
    {
      throw FormatError(path + ": more node lines than (n+1)^2");
    }
    std::string_view rest(line);
    std::array<double, 5> values{};
    for (int c = 0; c < 5; ++c)
    {
      const auto comma = rest.find(',');
      const std::string_view token = rest.substr(0, comma);
      values[c] = parse_double(token, path + " line " + std::to_string(k + 2));
      rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
      if (c < 4 && comma == std::string_view::npos)
      {
        throw FormatError(path + ": expected 5 comma-separated values on line " +
                          std::to_string(k + 2));
      }
    }
    if (static_cast<Eigen::Index>(values[0]) != k)
    {
      throw FormatError(path + ": node lines out of canonical order at line " +
                        std::to_string(k + 2));
    }
    re(k) = values[3];
    im(k) = values[4];
    ++k;
  }
  if (k != count)
  {
    throw FormatError(path + ": expected " + std::to_string(count) + " node lines, got " +
                      std::to_string(k));
  }
  return {ComplexField(std::move(mesh), std::move(re), std::move(im)), kappa};
}

}  // namespace glfem
