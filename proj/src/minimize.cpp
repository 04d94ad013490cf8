// SPDX-License-Identifier: Apache-2.0

#include "glfem/minimize.hpp"

#include <cmath>
#include <limits>
#include <iostream>
#include <stdexcept>
#include "glfem/errors.hpp"

namespace glfem
{

double SolverConfig::resolved_tau(double kappa) const
{
  if (tau)
  {
    return *tau;
  }
  return kappa > 0.0 ? 1.0 / (kappa * kappa) : 1.0;
}

void SolverConfig::validate() const
{
  if (tau && !(*tau > 0.0))
  {
    throw std::invalid_argument("SolverConfig: tau must be positive");
  }
  if (!(delta_gf > 0.0) || !(delta_newton > 0.0) || !(linear_tol > 0.0))
  {
    throw std::invalid_argument("SolverConfig: tolerances must be positive");
  }
  if (max_gf_iters < 0 || max_newton_iters < 0)
  {
    throw std::invalid_argument("SolverConfig: iteration caps must be nonnegative");
  }
}

double energy_change_scale(double kappa)
{
  return kappa > 0.0 ? 1.0 / (kappa * kappa) : 1.0;
}

double residual_floor(const GlSystem &system, const Eigen::VectorXd &c)
{
  const SparseMatrix &A = system.aA();
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
  for (Eigen::Index k = 0; k < A.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(A, k); it; ++it)
    {
      rows(it.row()) += std::abs(it.value());
    }
  }
  return 16 * std::numeric_limits<double>::epsilon() * rows.maxCoeff() * c.norm();
}

GradientFlow::GradientFlow(const GlSystem &system, double tau, double linear_tol)
  : system_(system), tau_(tau), solver_(MatrixKind::PositiveSemidefinite, linear_tol)
{
  if (!(tau > 0.0))
  {
    throw std::invalid_argument("gradient flow: tau must be positive");
  }
  const double k2 = system.kappa() * system.kappa();
  fixed_ = (1.0 - tau * k2) * system.mass_block() + tau * system.aA();
}

SparseMatrix GradientFlow::step_matrix(const Eigen::VectorXd &c) const
{
  const double k2 = system_.kappa() * system_.kappa();
  SparseMatrix S = system_.weighted_mass_block(c);
  Eigen::Map<Eigen::VectorXd> values(S.valuePtr(), S.nonZeros());
  values *= tau_ * k2;
  values += Eigen::Map<const Eigen::VectorXd>(fixed_.valuePtr(), fixed_.nonZeros());
  return S;
}

Eigen::VectorXd GradientFlow::step(const Eigen::VectorXd &c) const
{
  try
  {
    solver_.factorize(step_matrix(c));
    return solver_.solve(Eigen::VectorXd(system_.mass_block() * c));
  }
  catch (const SolverError &e)
  {
    throw SolverError(std::string("gradient-flow step (tau=") + std::to_string(tau_) +
                      "): " + e.what());
  }
}

GaugeNewton::GaugeNewton(const GlSystem &system, double linear_tol)
  : system_(system), solver_(MatrixKind::Indefinite, linear_tol)
{
}

Eigen::VectorXd GaugeNewton::increment(const Eigen::VectorXd &c) const
{
  const Eigen::Index dofs = system_.dofs(), n = dofs / 2;
  const SparseMatrix H = system_.hessian(c);
  Eigen::VectorXd iu(dofs);
  iu << -c.tail(n), c.head(n);
  const Eigen::VectorXd g = system_.mass_block() * iu;

  std::vector<Eigen::Triplet<double>> t;
  t.reserve(H.nonZeros() + 2 * dofs + 1);
  for (Eigen::Index k = 0; k < H.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(H, k); it; ++it)
    {
      t.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (Eigen::Index j = 0; j < dofs; ++j)
  {
    t.emplace_back(dofs, j, g(j));
    t.emplace_back(j, dofs, g(j));
  }
  t.emplace_back(dofs, dofs, 0.0);
  SparseMatrix K(dofs + 1, dofs + 1);
  K.setFromTriplets(t.begin(), t.end());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dofs + 1);
  rhs.head(dofs) = -system_.residual(c);
  try
  {
    solver_.factorize(K);
    return solver_.solve(rhs).head(dofs);
  }
  catch (const SolverError &e)
  {
    throw SolverError(std::string("Newton step: ") + e.what());
  }
}

ComplexField gradient_flow_step(const ComplexField &u_n, const Problem &problem, double tau)
{
  const GlSystem system(problem, u_n.mesh_ptr());
  const GradientFlow flow(system, tau);
  return ComplexField::from_coefficients(u_n.mesh_ptr(), flow.step(u_n.coefficients()));
}

ComplexField newton_step(const ComplexField &u, const Problem &problem)
{
  const GlSystem system(problem, u.mesh_ptr());
  const GaugeNewton newton(system);
  const Eigen::VectorXd c = u.coefficients();
  const Eigen::VectorXd c_new = c + newton.increment(c);
  const double r0 = system.residual(c).norm(), r1 = system.residual(c_new).norm();
  if (r1 > 10.0 * r0 && r1 > 0.0)
  {
    throw SolverError("Newton step diverged: residual grew from " + std::to_string(r0) + " to " +
                      std::to_string(r1));
  }
  return ComplexField::from_coefficients(u.mesh_ptr(), c_new);
}

MinimizeReport minimize(const ComplexField &initial, const Problem &problem,
                        const SolverConfig &config)
{
  const GlSystem system(problem, initial.mesh_ptr());
  return minimize(initial, system, config);
}

MinimizeReport minimize(const ComplexField &initial, const GlSystem &system,
                        const SolverConfig &config)
{
  config.validate();
  const double kappa = system.kappa();
  const double scale = energy_change_scale(kappa);
  const double tau = config.resolved_tau(kappa);
  const MeshPtr &mesh = system.mesh_ptr();

  MinimizeReport report;
  Eigen::VectorXd c = initial.coefficients();
  double E = system.energy(c);
  report.energy_history.push_back(E);

  const GradientFlow flow(system, tau, config.linear_tol);
  bool flow_done = false;
  while (report.gf_iters < config.max_gf_iters)
  {
    Eigen::VectorXd c_new = flow.step(c);
    const double E_new = system.energy(c_new);
    ++report.gf_iters;
    report.energy_history.push_back(E_new);
    const double change = scale * std::abs(E_new - E);
    c = std::move(c_new);
    E = E_new;
    if (config.log_every > 0 && report.gf_iters % config.log_every == 0)
    {
      std::clog << "[gf] n=" << mesh->subdivisions() << " kappa=" << kappa
                << " iter=" << report.gf_iters << " E/kappa^2=" << E * scale
                << " dE=" << change << '\n';
    }
    if (change < config.delta_gf)
    {
      flow_done = true;
      break;
    }
  }
  auto finish = [&](bool converged, std::string message)
  {
    report.field = ComplexField::from_coefficients(mesh, c);
    report.final_energy = E;
    report.final_residual_norm = system.residual(c).norm();
    report.converged = converged;
    report.message = std::move(message);
    return report;
  };
  if (!flow_done)
  {
    return finish(false, "gradient flow reached max_gf_iters");
  }

  const GaugeNewton newton(system, config.linear_tol);
  double r = system.residual(c).norm();
  report.newton_residuals.push_back(r);
  // Already stationary to round-off: a Newton solve would only amplify noise.
  if (r <= residual_floor(system, c))
  {
    return finish(true, "converged");
  }
  while (report.newton_iters < config.max_newton_iters)
  {
    Eigen::VectorXd c_new = c + newton.increment(c);
    const double r_new = system.residual(c_new).norm();
    const double E_new = system.energy(c_new);
    ++report.newton_iters;
    const double change = scale * std::abs(E_new - E);
    // At round-off level a singular Hessian (kappa = 0) turns noise into a drift along its
    // kernel; keep the previous iterate when the step does not reduce the residual.
    if (std::isfinite(E_new) && change < config.delta_newton && r_new >= r)
    {
      return finish(true, "converged");
    }
    if (!std::isfinite(E_new) || (r_new > 10.0 * r && r_new > 0.0))
    {
      return finish(false, "Newton diverged: residual grew from " + std::to_string(r) + " to " +
                               std::to_string(r_new));
    }
    c = std::move(c_new);
    E = E_new;
    r = r_new;
    report.newton_energies.push_back(E);
    report.newton_residuals.push_back(r);
    if (config.log_every > 0)
    {
      std::clog << "[newton] n=" << mesh->subdivisions() << " kappa=" << kappa
                << " iter=" << report.newton_iters << " E/kappa^2=" << E * scale
                << " |E'|=" << r << '\n';
    }
    if (change < config.delta_newton)
    {
      return finish(true, "converged");
    }
  }
  return finish(false, "Newton reached max_newton_iters");
}

}  // namespace glfem
