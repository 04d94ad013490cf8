// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include "glfem/assembly.hpp"
#include "glfem/linear_solve.hpp"
#include "test_util.hpp"

namespace glfem
{
namespace
{

using test::max_abs;
using test::random_field;
using Dense = Eigen::MatrixXd;
constexpr double pi = std::numbers::pi;

// |grad u + i kappa A u|^2 integrated element by element from the nodal data, sharing only the
// quadrature rule with the library.
double magnetic_form_oracle(const ComplexField &u, const Problem &problem)
{
  const Mesh2D &m = u.mesh();
  const QuadratureRule rule = quadrature(5);
  double total = 0.0;
  for (Eigen::Index t = 0; t < m.num_triangles(); ++t)
  {
    Eigen::Vector2d p[3];
    std::complex<double> v[3];
    for (int a = 0; a < 3; ++a)
    {
      p[a] = m.nodes().row(m.triangles()(t, a)).transpose();
      v[a] = u(m.triangles()(t, a));
    }
    Eigen::Matrix2d J;
    J << p[1] - p[0], p[2] - p[0];
    const double area = 0.5 * std::abs(J.determinant());
    // Gradient of the linear interpolant: J^T grad = (v1 - v0, v2 - v0).
    const Eigen::Matrix2d JinvT = J.inverse().transpose();
    const Eigen::Vector2cd grad =
        JinvT.cast<std::complex<double>>() * Eigen::Vector2cd(v[1] - v[0], v[2] - v[0]);
    for (Eigen::Index q = 0; q < rule.size(); ++q)
    {
      const double l0 = rule.barycentric(q, 0), l1 = rule.barycentric(q, 1),
                   l2 = rule.barycentric(q, 2);
      const Eigen::Vector2d x = l0 * p[0] + l1 * p[1] + l2 * p[2];
      const std::complex<double> uq = l0 * v[0] + l1 * v[1] + l2 * v[2];
      const Eigen::Vector2d A = problem.potential(x(0), x(1));
      const std::complex<double> i(0.0, 1.0);
      const std::complex<double> c0 = grad(0) + i * problem.kappa * A(0) * uq;
      const std::complex<double> c1 = grad(1) + i * problem.kappa * A(1) * uq;
      total += 2.0 * area * rule.weights(q) * (std::norm(c0) + std::norm(c1));
    }
  }
  return total;
}

double min_eigenvalue(const SparseMatrix &A)
{
  return Eigen::SelfAdjointEigenSolver<Dense>(Dense(A)).eigenvalues().minCoeff();
}

TEST(Potential, DefaultPotentialValues)
{
  const Potential A = Potential::paper();
  EXPECT_EQ(A.name(), "paper");
  EXPECT_DOUBLE_EQ(A.a_inf(), std::sqrt(2.0));
  const Eigen::Vector2d v = A(0.25, 0.1);
  EXPECT_NEAR(v(0), std::sqrt(2.0) * std::sin(pi / 4) * std::cos(0.1 * pi), 1e-15);
  EXPECT_NEAR(v(1), -std::sqrt(2.0) * std::cos(pi / 4) * std::sin(0.1 * pi), 1e-15);
  double sup = 0.0;
  for (int i = 0; i <= 50; ++i)
  {
    for (int j = 0; j <= 50; ++j)
    {
      sup = std::max(sup, A(i / 50.0, j / 50.0).norm());
      EXPECT_EQ(A.divergence(i / 50.0, j / 50.0), 0.0);
    }
  }
  EXPECT_LE(sup, A.a_inf() + 1e-15);
}

TEST(Potential, TangentialOnBoundary)
{
  const Potential A = Potential::paper();
  for (int k = 0; k <= 20; ++k)
  {
    const double s = k / 20.0;
    EXPECT_NEAR(A(0.0, s)(0), 0.0, 1e-15);  // normal (-1, 0)
    EXPECT_NEAR(A(1.0, s)(0), 0.0, 1e-15);
    EXPECT_NEAR(A(s, 0.0)(1), 0.0, 1e-15);
    EXPECT_NEAR(A(s, 1.0)(1), 0.0, 1e-15);
  }
}

TEST(Potential, ZeroPotential)
{
  const Potential Z = Potential::zero();
  EXPECT_EQ(Z.name(), "zero");
  EXPECT_EQ(Z.a_inf(), 0.0);
  EXPECT_EQ(Z(0.3, 0.7).norm(), 0.0);
}

TEST(Problem, StabilizationConstant)
{
  EXPECT_DOUBLE_EQ(Problem(8.0).beta_sq, 3.0 * 64.0);
  EXPECT_DOUBLE_EQ(Problem(8.0, Potential::zero()).beta_sq, 64.0);
  EXPECT_THROW(Problem(-1.0), std::invalid_argument);
}

TEST(MassMatrix, EntriesSumToArea)
{
  EXPECT_NEAR(Eigen::VectorXd::Ones(25).dot(mass_matrix(build_uniform(4)) * Eigen::VectorXd::Ones(25)),
              1.0, 1e-14);
}

TEST(MassMatrix, ReferenceTriangleEntries)
{
  // On n = 1 node (1, 0) belongs to the lower triangle (0,0), (1,0), (1,1) only; that
  // triangle has the reference area 1/2, so int phi^2 = 1/12 and int phi_a phi_b = 1/24.
  const Mesh2D m = build_uniform(1);
  const Dense M(mass_matrix(m));
  const int n10 = m.node_index(1, 0), n00 = m.node_index(0, 0), n11 = m.node_index(1, 1);
  EXPECT_NEAR(M(n10, n10), 1.0 / 12.0, 1e-16);
  EXPECT_NEAR(M(n10, n00), 1.0 / 24.0, 1e-16);
  EXPECT_NEAR(M(n10, n11), 1.0 / 24.0, 1e-16);
  EXPECT_EQ(M(n10, m.node_index(0, 1)), 0.0);
  // The diagonal node (0,0) sits in both triangles.
  EXPECT_NEAR(M(n00, n00), 2.0 / 12.0, 1e-16);
}

TEST(MassMatrix, PositiveDefinite)
{
  for (int n : {1, 2, 3, 4})
  {
    const Dense M(mass_matrix(build_uniform(n)));
    EXPECT_EQ(M, M.transpose());
    EXPECT_EQ(Eigen::LLT<Dense>(M).info(), Eigen::Success) << "n=" << n;
  }
}

TEST(Stiffness, ConstantsInKernel)
{
  const SparseMatrix K = stiffness_matrix(build_uniform(5));
  EXPECT_LT(max_abs(K * Eigen::VectorXd::Ones(36)), 1e-13);
  EXPECT_EQ(max_abs(Dense(K) - Dense(K).transpose()), 0.0);
}

TEST(MagneticForm, ZeroPotentialIsStiffness)
{
  const Mesh2D m = build_uniform(4);
  const BlockOperator a = assemble_aA(Problem(3.0, Potential::zero()), m);
  const Dense K(stiffness_matrix(m));
  EXPECT_EQ(max_abs(Dense(a.ir)), 0.0);
  EXPECT_EQ(max_abs(Dense(a.ri)), 0.0);
  EXPECT_LT(max_abs(Dense(a.rr) - K), 1e-14);
  EXPECT_LT(max_abs(Dense(a.ii) - K), 1e-14);
  const ComplexField one = ComplexField::constant(make_mesh(4), {0.8, 0.6});
  EXPECT_NEAR(a.quadratic_form(one.coefficients()), 0.0, 1e-13);
}

TEST(MagneticForm, UnitConstantGivesKappaSquared)
{
  for (double kappa : {1.0, 8.0})
  {
    const Problem p(kappa);
    const MeshPtr m = make_mesh(16);
    const BlockOperator a = assemble_aA(p, *m);
    const double q = a.quadratic_form(ComplexField::constant(m, {0.8, 0.6}).coefficients());
    EXPECT_NEAR(q, kappa * kappa, 1e-10 * kappa * kappa);
  }
}

TEST(MagneticForm, SymmetricBlocksAndSparsity)
{
  const Mesh2D m = build_uniform(3);
  const BlockOperator a = assemble_aA(Problem(5.0), m);
  const Dense F(a.full());
  EXPECT_EQ(max_abs(F - F.transpose()), 0.0);
  EXPECT_EQ(max_abs(Dense(a.ir) - Dense(a.ri).transpose()), 0.0);
  // Entries only couple nodes of a common triangle.
  Eigen::MatrixXi adjacent = Eigen::MatrixXi::Zero(m.num_nodes(), m.num_nodes());
  for (Eigen::Index t = 0; t < m.num_triangles(); ++t)
  {
    for (int i = 0; i < 3; ++i)
    {
      for (int j = 0; j < 3; ++j)
      {
        adjacent(m.triangles()(t, i), m.triangles()(t, j)) = 1;
      }
    }
  }
  for (const SparseMatrix *block : {&a.rr, &a.ir, &a.ri, &a.ii})
  {
    for (Eigen::Index k = 0; k < block->outerSize(); ++k)
    {
      for (SparseMatrix::InnerIterator it(*block, k); it; ++it)
      {
        if (it.value() != 0.0)
        {
          EXPECT_EQ(adjacent(it.row(), it.col()), 1);
        }
      }
    }
  }
}

TEST(MagneticForm, MatchesIndependentQuadrature)
{
  for (double kappa : {0.5, 2.0, 8.0})
  {
    const Problem p(kappa);
    for (unsigned seed : {21u, 22u})
    {
      const ComplexField u = random_field(make_mesh(5), seed);
      const double q = assemble_aA(p, u.mesh()).quadratic_form(u.coefficients());
      const double oracle = magnetic_form_oracle(u, p);
      EXPECT_NEAR(q, oracle, 1e-12 * oracle);
      EXPECT_GE(q, 0.0);
    }
  }
}

TEST(StabilizedForm, ConstantFields)
{
  const MeshPtr m = make_mesh(16);
  const double kappa = 6.0, k2 = kappa * kappa;
  const BlockOperator z = assemble_ahat(Problem(kappa, Potential::zero()), *m);
  EXPECT_NEAR(z.quadratic_form(ComplexField::constant(m, 1.0).coefficients()), k2, 1e-12 * k2);
  const BlockOperator a = assemble_ahat(Problem(kappa), *m);
  EXPECT_NEAR(a.quadratic_form(ComplexField::constant(m, {0.8, 0.6}).coefficients()), 4.0 * k2,
              1e-10 * k2);
}

TEST(StabilizedForm, CholeskySucceeds)
{
  for (double kappa : {8.0, 24.0})
  {
    SymmetricSolver solver(MatrixKind::PositiveDefinite);
    EXPECT_NO_THROW(solver.factorize(assemble_ahat(Problem(kappa), build_uniform(16)).full()));
  }
}

TEST(StabilizedForm, KappaZeroIsOnlySemidefinite)
{
  // beta^2 = 0: the form reduces to the stiffness matrix, whose kernel holds the constants.
  const BlockOperator a = assemble_ahat(Problem(0.0), build_uniform(4));
  EXPECT_NEAR(min_eigenvalue(a.full()), 0.0, 1e-12);
  EXPECT_LT(max_abs(a.apply(Eigen::VectorXd::Ones(50))), 1e-13);
}

TEST(StabilizedForm, CoerciveInKappaNorm)
{
  const double kappa = 8.0;
  const Problem p(kappa);
  const MeshPtr m = make_mesh(8);
  const BlockOperator a = assemble_ahat(p, *m);
  double worst = 1e300;
  for (unsigned seed = 30; seed < 40; ++seed)
  {
    const ComplexField u = random_field(m, seed);
    const double ratio = a.quadratic_form(u.coefficients()) / std::pow(norms(u, kappa).hk1, 2);
    EXPECT_GT(ratio, 0.0);
    worst = std::min(worst, ratio);
  }
  RecordProperty("observed_coercivity", std::to_string(worst));
  EXPECT_GT(min_eigenvalue(a.full()), 0.0);
}

TEST(WeightedMass, ConstantWeights)
{
  const MeshPtr m = make_mesh(4);
  const Dense M(mass_matrix(*m));
  EXPECT_LT(max_abs(Dense(weighted_mass(ComplexField::constant(m, 1.0))) - M), 1e-14);
  EXPECT_EQ(max_abs(Dense(weighted_mass(ComplexField::zero(m)))), 0.0);
  EXPECT_LT(max_abs(Dense(weighted_mass(ComplexField::constant(m, {0.8, 0.6}))) - M), 1e-14);
}

TEST(Energy, AnalyticValues)
{
  for (int n : {16, 32})
  {
    for (double kappa : {1.0, 8.0, 24.0})
    {
      const Problem p(kappa);
      const MeshPtr m = make_mesh(n);
      const double k2 = kappa * kappa;
      EXPECT_NEAR(energy(ComplexField::zero(m), p), k2 / 4, 1e-10 * k2 / 4);
      EXPECT_NEAR(energy(ComplexField::constant(m, {0.8, 0.6}), p), k2 / 2, 1e-10 * k2 / 2);
    }
  }
}

TEST(Energy, GaugeInvariance)
{
  const Problem p(8.0);
  for (unsigned seed : {41u, 42u, 43u})
  {
    const ComplexField u = random_field(make_mesh(6), seed);
    const double E = energy(u, p);
    for (double theta : {0.4, 1.9, -2.6})
    {
      EXPECT_NEAR(energy(u.rotated(theta), p), E, 1e-12 * E);
    }
  }
}

// Five-point central difference. E is a quartic and E' a cubic polynomial in the
// coefficients, so the stencil is exact up to round-off and a large step can be used.
template <class F>
auto central_difference(const F &f, double step)
{
  return (f(-2 * step) - 8 * f(-step) + 8 * f(step) - f(2 * step)) / (12 * step);
}

TEST(Residual, CentralDifferencesOfEnergy)
{
  const Problem p(2.0);
  for (unsigned seed : {51u, 52u, 53u, 54u})
  {
    const ComplexField u = random_field(make_mesh(4), seed);
    const Eigen::VectorXd g = residual(u, p), c = u.coefficients();
    for (Eigen::Index j = 0; j < c.size(); ++j)
    {
      const auto E = [&](double t)
      {
        Eigen::VectorXd ct = c;
        ct(j) += t;
        return energy(ComplexField::from_coefficients(u.mesh_ptr(), ct), p);
      };
      EXPECT_NEAR(central_difference(E, 0.05), g(j), 1e-6 * std::abs(g(j)))
          << "seed " << seed << " component " << j;
    }
  }
}

TEST(Residual, GaugeOrthogonality)
{
  for (double kappa : {1.0, 8.0})
  {
    const Problem p(kappa);
    for (unsigned seed : {52u, 53u})
    {
      const ComplexField u = random_field(make_mesh(7), seed, 1.5);
      const Eigen::VectorXd g = residual(u, p), iu = u.times_i().coefficients();
      EXPECT_LE(std::abs(g.dot(iu)), 1e-12 * g.norm() * iu.norm());
    }
  }
}

TEST(Residual, ZeroIsCriticalWithoutPotential)
{
  const MeshPtr m = make_mesh(4);
  EXPECT_EQ(max_abs(residual(ComplexField::zero(m), Problem(3.0, Potential::zero()))), 0.0);
}

TEST(Hessian, DirectionalDifferencesOfResidual)
{
  const Problem p(2.0);
  for (unsigned seed : {61u, 63u, 65u})
  {
    const ComplexField u = random_field(make_mesh(4), seed);
    const Eigen::VectorXd v = test::random_vector(u.coefficients().size(), seed + 1);
    const MeshPtr &m = u.mesh_ptr();
    const auto r = [&](double t)
    { return Eigen::VectorXd(residual(ComplexField::from_coefficients(m, u.coefficients() + t * v), p)); };
    const Eigen::VectorXd fd = central_difference(r, 0.05);
    const Eigen::VectorXd Hv = hessian(u, p).apply(v);
    for (Eigen::Index j = 0; j < v.size(); ++j)
    {
      EXPECT_NEAR(fd(j), Hv(j), 1e-6 * std::abs(Hv(j))) << "seed " << seed << " component " << j;
    }
  }
}

TEST(Hessian, ExactlySymmetric)
{
  const ComplexField u = random_field(make_mesh(5), 63);
  const Dense H(hessian(u, Problem(8.0)).full());
  EXPECT_EQ(max_abs(H - H.transpose()), 0.0);
}

TEST(Hessian, AtZeroWithoutPotential)
{
  const Mesh2D &mesh = build_uniform(4);
  const double kappa = 3.0;
  const BlockOperator H = hessian(ComplexField::zero(make_mesh(4)), Problem(kappa, Potential::zero()));
  const Dense expected = Dense(stiffness_matrix(mesh)) - kappa * kappa * Dense(mass_matrix(mesh));
  EXPECT_LT(max_abs(Dense(H.rr) - expected), 1e-13);
  EXPECT_LT(max_abs(Dense(H.ii) - expected), 1e-13);
  EXPECT_EQ(max_abs(Dense(H.ir)), 0.0);
  EXPECT_EQ(max_abs(Dense(H.ri)), 0.0);
}

TEST(Hessian, SpectrumInvariantUnderGlobalPhase)
{
  const Problem p(4.0);
  const ComplexField u = random_field(make_mesh(4), 64);
  const Dense M(block_diagonal(mass_matrix(u.mesh())));
  auto spectrum = [&](const ComplexField &w)
  {
    return Eigen::GeneralizedSelfAdjointEigenSolver<Dense>(Dense(hessian(w, p).full()), M)
        .eigenvalues();
  };
  const Eigen::VectorXd a = spectrum(u), b = spectrum(u.rotated(0.77));
  EXPECT_LT(max_abs(a - b), 1e-9 * std::max(1.0, max_abs(a)));
}

TEST(GlSystem, MatchesFreeFunctions)
{
  const Problem p(5.0);
  const ComplexField u = random_field(make_mesh(6), 71);
  const GlSystem s(p, u.mesh_ptr());
  const Eigen::VectorXd c = u.coefficients();
  EXPECT_NEAR(s.energy(c), energy(u, p), 1e-12 * energy(u, p));
  EXPECT_LT(max_abs(s.residual(c) - residual(u, p)), 1e-12 * max_abs(residual(u, p)));
  EXPECT_LT(max_abs(Dense(s.hessian(c)) - Dense(hessian(u, p).full())), 1e-12);
  EXPECT_LT(max_abs(Dense(s.aA()) - Dense(assemble_aA(p, u.mesh()).full())), 1e-13);
  EXPECT_LT(max_abs(Dense(s.ahat()) - Dense(assemble_ahat(p, u.mesh()).full())), 1e-12);
  EXPECT_LT(max_abs(Dense(s.weighted_mass_block(c)) -
                    Dense(block_diagonal(weighted_mass(u)))),
            1e-14);
  EXPECT_NEAR(s.ahat_norm(c), std::sqrt(assemble_ahat(p, u.mesh()).quadratic_form(c)), 1e-12);
}

TEST(BlockOperator, FullRoundTrip)
{
  const BlockOperator a = assemble_aA(Problem(2.0), build_uniform(2));
  const BlockOperator b = BlockOperator::from_full(a.full());
  EXPECT_EQ(Dense(b.full()), Dense(a.full()));
  const Eigen::VectorXd v = test::random_vector(18, 3);
  EXPECT_LT(max_abs(a.apply(v) - a.full() * v), 1e-15);
}

}  // namespace
}  // namespace glfem
