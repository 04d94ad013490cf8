// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <Eigen/Eigenvalues>
#include "glfem/minimize.hpp"
#include "glfem/study.hpp"
#include "test_util.hpp"

namespace glfem
{
namespace
{

using test::max_abs;

const MinimizeReport &kappa2_minimizer()
{
  static const MinimizeReport r =
      minimize(ComplexField::constant(make_mesh(8), {0.8, 0.6}), Problem(2.0));
  return r;
}

TEST(SolverConfig, Defaults)
{
  const SolverConfig c;
  EXPECT_FALSE(c.tau.has_value());
  EXPECT_DOUBLE_EQ(c.resolved_tau(8.0), 1.0 / 64.0);
  EXPECT_DOUBLE_EQ(c.resolved_tau(0.0), 1.0);
  EXPECT_EQ(c.delta_gf, 1e-9);
  EXPECT_EQ(c.delta_newton, 1e-12);
  SolverConfig bad;
  bad.tau = -1.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = SolverConfig{};
  bad.delta_gf = 0.0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(GradientFlowStep, CriticalPointIsFixed)
{
  const MinimizeReport &r = kappa2_minimizer();
  ASSERT_TRUE(r.converged);
  const ComplexField next = gradient_flow_step(r.field, Problem(2.0), 0.25);
  EXPECT_LT(max_abs(next.coefficients() - r.field.coefficients()), 1e-10);
}

TEST(GradientFlowStep, ZeroStaysZeroWithoutPotential)
{
  const MeshPtr m = make_mesh(4);
  const ComplexField next = gradient_flow_step(ComplexField::zero(m), Problem(2.0, Potential::zero()), 0.1);
  EXPECT_EQ(max_abs(next.coefficients()), 0.0);
}

TEST(GradientFlowStep, DecreasesEnergy)
{
  const Problem p(2.0);
  const ComplexField u0 = ComplexField::constant(make_mesh(8), {0.8, 0.6});
  const ComplexField u1 = gradient_flow_step(u0, p, 0.25);
  const double E0 = energy(u0, p), E1 = energy(u1, p);
  EXPECT_LT(E1, E0);
}

TEST(NewtonStep, FixedPointAtMinimizer)
{
  const MinimizeReport &r = kappa2_minimizer();
  const Problem p(2.0);
  const GlSystem s(p, r.field.mesh_ptr());
  const GaugeNewton newton(s);
  const Eigen::VectorXd delta = newton.increment(r.field.coefficients());
  EXPECT_LE(delta.norm(), 1e-9 * r.field.coefficients().norm());
}

TEST(NewtonStep, PreservesGaugeCondition)
{
  const Problem p(4.0);
  const MeshPtr m = make_mesh(8);
  const GlSystem s(p, m);
  const GradientFlow flow(s, 1.0 / 16.0);
  Eigen::VectorXd c = ComplexField::constant(m, {0.8, 0.6}).coefficients();
  for (int k = 0; k < 20; ++k)
  {
    c = flow.step(c);
  }
  const Eigen::VectorXd delta = GaugeNewton(s).increment(c);
  const Eigen::VectorXd iu = ComplexField::from_coefficients(m, c).times_i().coefficients();
  EXPECT_LE(std::abs(s.m(c + delta, iu)), 1e-12 * s.m(c, c));
}

TEST(NewtonStep, QuadraticConvergence)
{
  const Problem p(8.0);
  const MeshPtr m = make_mesh(64);
  const GlSystem s(p, m);
  const GradientFlow flow(s, 1.0 / 64.0);
  Eigen::VectorXd c = ComplexField::constant(m, {0.8, 0.6}).coefficients();
  double E = s.energy(c);
  for (int k = 0; k < 1000; ++k)
  {
    c = flow.step(c);
    const double E_new = s.energy(c);
    const bool done = std::abs(E_new - E) / 64.0 < 1e-9;
    E = E_new;
    if (done)
    {
      break;
    }
  }
  const GaugeNewton newton(s);
  std::vector<double> r{s.residual(c).norm()};
  for (int k = 0; k < 3; ++k)
  {
    c += newton.increment(c);
    r.push_back(s.residual(c).norm());
  }
  // log r_{k+1} / log r_k while the residual is above round-off.
  int tested = 0;
  for (std::size_t k = 0; k + 1 < r.size(); ++k)
  {
    if (r[k + 1] < 1e-12)
    {
      break;
    }
    EXPECT_NEAR(std::log(r[k + 1]) / std::log(r[k]), 2.0, 0.5) << "step " << k;
    ++tested;
  }
  EXPECT_GE(tested, 1);
  EXPECT_LT(r.back(), 1e-11);
}

TEST(Minimize, KappaZeroGivesConstant)
{
  const MinimizeReport r = minimize(ComplexField::constant(make_mesh(8), {0.8, 0.6}), Problem(0.0));
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.final_energy, 0.0, 1e-14);
  EXPECT_LT(max_abs(r.field.re().array() - r.field.re()(0)), 1e-12);
}

TEST(Minimize, PostconditionsAtKappaFour)
{
  const double kappa = 4.0;
  const Problem p(kappa);
  const MinimizeReport r = minimize(ComplexField::constant(make_mesh(16), {0.8, 0.6}), p);
  ASSERT_TRUE(r.converged) << r.message;
  EXPECT_EQ(static_cast<int>(r.energy_history.size()), r.gf_iters + 1);
  EXPECT_LE(r.final_residual_norm, 1e-8 * kappa * kappa * r.field.coefficients().norm());
  EXPECT_LE(r.field.modulus().maxCoeff(), 1.05);
  const BoundsReport b = bounds_report(r.field, p);
  EXPECT_LE(b.energy, kappa * kappa / 4);
  EXPECT_LE(b.l2, 2.0);
  RecordProperty("grad_over_kappa", std::to_string(b.grad_over_k));
  int increases = 0;
  for (std::size_t k = 4; k < r.energy_history.size(); ++k)
  {
    increases += r.energy_history[k] > r.energy_history[k - 1];
  }
  RecordProperty("energy_increases_after_three_steps", increases);
}

TEST(Minimize, HessianSingularAlongGaugeDirection)
{
  const MinimizeReport &r = kappa2_minimizer();
  const GlSystem s(Problem(2.0), r.field.mesh_ptr());
  const SparseMatrix H = s.hessian(r.field.coefficients());
  const Eigen::VectorXd iu = r.field.times_i().coefficients();
  const double Hnorm = Eigen::MatrixXd(H).operatorNorm();
  EXPECT_LE((H * iu).norm(), 1e-6 * Hnorm * iu.norm());
}

TEST(Minimize, IterationCapIsReported)
{
  SolverConfig c;
  c.max_gf_iters = 2;
  const MinimizeReport r = minimize(ComplexField::constant(make_mesh(8), {0.8, 0.6}), Problem(4.0), c);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.gf_iters, 2);
  EXPECT_EQ(r.newton_iters, 0);
  EXPECT_FALSE(r.message.empty());
}

TEST(Minimize, NewtonCapIsReported)
{
  SolverConfig c;
  c.max_newton_iters = 0;
  const MinimizeReport r = minimize(ComplexField::constant(make_mesh(8), {0.8, 0.6}), Problem(4.0), c);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.gf_iters, 0);
}

TEST(Minimize, DeterministicRepeat)
{
  const Problem p(3.0);
  const ComplexField u0 = ComplexField::constant(make_mesh(8), {0.8, 0.6});
  const MinimizeReport a = minimize(u0, p), b = minimize(u0, p);
  EXPECT_EQ(a.field.re(), b.field.re());
  EXPECT_EQ(a.field.im(), b.field.im());
  EXPECT_EQ(a.energy_history, b.energy_history);
}

}  // namespace
}  // namespace glfem
