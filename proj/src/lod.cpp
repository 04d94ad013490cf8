// SPDX-License-Identifier: Apache-2.0

#include "glfem/lod.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>
#include <Eigen/Cholesky>
#include <Eigen/LU>
#include "glfem/errors.hpp"
#include "glfem/linear_solve.hpp"

namespace glfem
{

namespace
{

// Coefficients of i v.
Eigen::VectorXd times_i(const Eigen::VectorXd &v)
{
  const Eigen::Index n = v.size() / 2;
  Eigen::VectorXd out(v.size());
  out << -v.tail(n), v.head(n);
  return out;
}

Eigen::MatrixXd times_i(const Eigen::MatrixXd &V)
{
  const Eigen::Index n = V.rows() / 2;
  Eigen::MatrixXd out(V.rows(), V.cols());
  out.topRows(n) = -V.bottomRows(n);
  out.bottomRows(n) = V.topRows(n);
  return out;
}

double inf_norm(const Eigen::VectorXd &v)
{
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

void check_fine_mesh(const LodBasis &basis, const Mesh2D &mesh, const char *what)
{
  if (basis.fine()->subdivisions() != mesh.subdivisions())
  {
    throw std::invalid_argument(std::string(what) + ": field lives on n=" +
                                std::to_string(mesh.subdivisions()) + ", basis on n=" +
                                std::to_string(basis.fine()->subdivisions()));
  }
}

// Real right-hand sides M P phi_j of the defining equation, one column per coarse node.
Eigen::MatrixXd hat_loads(const Mesh2D &coarse, const GlSystem &fine_system)
{
  const SparseMatrix P = prolongation_matrix(coarse, fine_system.mesh());
  const Eigen::Index n = fine_system.mesh().num_nodes();
  Eigen::MatrixXd F = Eigen::MatrixXd::Zero(2 * n, P.cols());
  F.topRows(n) = fine_system.mass() * P;
  return F;
}

Eigen::VectorXd solve_dense_spd(const Eigen::MatrixXd &A, const Eigen::VectorXd &b)
{
  const Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() == Eigen::Success)
  {
    return llt.solve(b);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success)
  {
    throw SolverError("reduced system is not positive definite");
  }
  return ldlt.solve(b);
}

}  // namespace

LodBasis::LodBasis(MeshPtr coarse, MeshPtr fine, Eigen::MatrixXd columns)
  : coarse_(std::move(coarse)), fine_(std::move(fine)), X_(std::move(columns))
{
  if (X_.rows() != 2 * fine_->num_nodes() || X_.cols() != coarse_->num_nodes())
  {
    throw std::invalid_argument("LodBasis: column matrix has the wrong shape");
  }
}

Eigen::VectorXd LodBasis::expand(const Eigen::VectorXd &y) const
{
  const Eigen::Index m = coarse_nodes();
  if (y.size() != 2 * m)
  {
    throw std::invalid_argument("LodBasis::expand: expected " + std::to_string(2 * m) +
                                " reduced coefficients");
  }
  return X_ * y.head(m) + times_i(Eigen::VectorXd(X_ * y.tail(m)));
}

ComplexField LodBasis::field(const Eigen::VectorXd &y) const
{
  return ComplexField::from_coefficients(fine_, expand(y));
}

Eigen::VectorXd LodBasis::restrict_dual(const Eigen::VectorXd &v) const
{
  const Eigen::Index m = coarse_nodes();
  Eigen::VectorXd out(2 * m);
  out.head(m) = X_.transpose() * v;
  out.tail(m) = -(X_.transpose() * times_i(v));
  return out;
}

Eigen::MatrixXd LodBasis::reduce(const SparseMatrix &A, bool commutes_with_i) const
{
  const Eigen::Index m = coarse_nodes();
  Eigen::MatrixXd R(2 * m, 2 * m);
  const Eigen::MatrixXd AX = A * X_;
  R.topLeftCorner(m, m) = X_.transpose() * AX;
  if (commutes_with_i)
  {
    // A (iX) = i (A X), so the imaginary blocks repeat the real ones.
    const Eigen::MatrixXd Q = -(X_.transpose() * times_i(AX));
    R.topRightCorner(m, m) = -Q;
    R.bottomLeftCorner(m, m) = Q;
    R.bottomRightCorner(m, m) = R.topLeftCorner(m, m);
  }
  else
  {
    const Eigen::MatrixXd iX = times_i(X_);
    const Eigen::MatrixXd AiX = A * iX;
    R.topRightCorner(m, m) = X_.transpose() * AiX;
    R.bottomLeftCorner(m, m) = iX.transpose() * AX;
    R.bottomRightCorner(m, m) = iX.transpose() * AiX;
  }
  return 0.5 * (R + R.transpose());
}

LodBasis build_lod_basis(int n_H, int n_h, const Problem &problem)
{
  const GlSystem fine(problem, make_mesh(n_h));
  return build_lod_basis(make_mesh(n_H), fine);
}

LodBasis build_lod_basis(MeshPtr coarse, const GlSystem &fine_system)
{
  if (!(fine_system.problem().beta_sq > 0.0))
  {
    throw std::invalid_argument("build_lod_basis: beta^2 = kappa^2 (a_inf^2 + 1) must be positive "
                                "(kappa = 0 makes a-hat singular)");
  }
  if (!is_refinement_of(fine_system.mesh(), *coarse))
  {
    throw NotNestedError("build_lod_basis: n_h=" + std::to_string(fine_system.mesh().subdivisions()) +
                         " is not a power-of-two multiple of n_H=" +
                         std::to_string(coarse->subdivisions()));
  }
  SymmetricSolver solver(MatrixKind::PositiveDefinite);
  try
  {
    solver.factorize(fine_system.ahat());
  }
  catch (const SolverError &e)
  {
    throw SolverError(std::string("build_lod_basis: ") + e.what());
  }
  const Eigen::MatrixXd F = hat_loads(*coarse, fine_system);
  Eigen::MatrixXd X(F.rows(), F.cols());
  for (Eigen::Index j = 0; j < F.cols(); ++j)
  {
    X.col(j) = solver.solve(Eigen::VectorXd(F.col(j)));
  }
  return {std::move(coarse), fine_system.mesh_ptr(), std::move(X)};
}

double lod_basis_residual(const LodBasis &basis, const GlSystem &fine_system)
{
  check_fine_mesh(basis, fine_system.mesh(), "lod_basis_residual");
  const Eigen::MatrixXd F = hat_loads(*basis.coarse(), fine_system);
  const Eigen::MatrixXd R = fine_system.ahat() * basis.columns() - F;
  double worst = 0.0;
  for (Eigen::Index j = 0; j < F.cols(); ++j)
  {
    worst = std::max(worst, R.col(j).cwiseAbs().maxCoeff() / F.col(j).cwiseAbs().maxCoeff());
  }
  return worst;
}

double lod_linearity_defect(const LodBasis &basis, const GlSystem &fine_system, Eigen::Index j)
{
  check_fine_mesh(basis, fine_system.mesh(), "lod_linearity_defect");
  if (j < 0 || j >= basis.coarse_nodes())
  {
    throw std::out_of_range("lod_linearity_defect: column index out of range");
  }
  const Eigen::MatrixXd F = hat_loads(*basis.coarse(), fine_system);
  const Eigen::VectorXd bj = basis.columns().col(j);
  const Eigen::VectorXd direct =
      linear_solve(fine_system.ahat(), times_i(Eigen::VectorXd(F.col(j))));
  return inf_norm(direct - times_i(bj)) / inf_norm(bj);
}

LodProjection lod_ritz_project(const ComplexField &u_fine, const LodBasis &basis,
                               const GlSystem &fine_system)
{
  check_fine_mesh(basis, u_fine.mesh(), "lod_ritz_project");
  const SparseMatrix A = fine_system.ahat();
  const Eigen::MatrixXd G = basis.reduce(A, true);
  const Eigen::VectorXd c = u_fine.coefficients();
  const Eigen::VectorXd rhs = basis.restrict_dual(A * c);
  LodProjection p;
  try
  {
    p.coefficients = solve_dense_spd(G, rhs);
  }
  catch (const SolverError &e)
  {
    throw SolverError(std::string("lod_ritz_project: ") + e.what());
  }
  const Eigen::VectorXd rep = basis.expand(p.coefficients);
  p.field = ComplexField::from_coefficients(basis.fine(), rep);
  const double scale = inf_norm(rhs);
  p.orthogonality_residual =
      inf_norm(basis.restrict_dual(A * (c - rep))) / (scale > 0.0 ? scale : 1.0);
  return p;
}

MinimizeReport minimize_lod(const ComplexField &initial, const LodBasis &basis,
                            const GlSystem &fine_system, const SolverConfig &config)
{
  config.validate();
  check_fine_mesh(basis, initial.mesh(), "minimize_lod");
  const double kappa = fine_system.kappa(), k2 = kappa * kappa;
  const double scale = energy_change_scale(kappa);
  const double tau = config.resolved_tau(kappa);
  const Eigen::Index m = basis.coarse_nodes();

  const Eigen::MatrixXd Mr = basis.reduce(fine_system.mass_block(), true);
  const Eigen::MatrixXd Fr = basis.reduce(
      SparseMatrix((1.0 - tau * k2) * fine_system.mass_block() + tau * fine_system.aA()), true);

  MinimizeReport report;
  Eigen::VectorXd y = lod_ritz_project(initial, basis, fine_system).coefficients;
  Eigen::VectorXd c = basis.expand(y);
  double E = fine_system.energy(c);
  report.energy_history.push_back(E);

  auto reduced_residual = [&](const Eigen::VectorXd &fine_c)
  { return basis.restrict_dual(fine_system.residual(fine_c)); };
  auto finish = [&](bool converged, std::string message)
  {
    report.field = ComplexField::from_coefficients(basis.fine(), c);
    report.final_energy = E;
    report.final_residual_norm = reduced_residual(c).norm();
    report.converged = converged;
    report.message = std::move(message);
    return report;
  };

  bool flow_done = false;
  while (report.gf_iters < config.max_gf_iters)
  {
    const Eigen::MatrixXd S =
        Fr + (tau * k2) * basis.reduce(fine_system.weighted_mass_block(c), true);
    Eigen::VectorXd y_new;
    try
    {
      y_new = solve_dense_spd(S, Mr * y);
    }
    catch (const SolverError &e)
    {
      throw SolverError(std::string("LOD gradient-flow step: ") + e.what());
    }
    Eigen::VectorXd c_new = basis.expand(y_new);
    const double E_new = fine_system.energy(c_new);
    ++report.gf_iters;
    report.energy_history.push_back(E_new);
    const double change = scale * std::abs(E_new - E);
    y = std::move(y_new);
    c = std::move(c_new);
    E = E_new;
    if (config.log_every > 0 && report.gf_iters % config.log_every == 0)
    {
      std::clog << "[lod-gf] n_H=" << basis.coarse()->subdivisions() << " iter=" << report.gf_iters
                << " E/kappa^2=" << E * scale << " dE=" << change << '\n';
    }
    if (change < config.delta_gf)
    {
      flow_done = true;
      break;
    }
  }
  if (!flow_done)
  {
    return finish(false, "gradient flow reached max_gf_iters");
  }

  const Eigen::Index d = 2 * m;
  Eigen::VectorXd g_r = reduced_residual(c);
  double r = g_r.norm();
  report.newton_residuals.push_back(r);
  while (report.newton_iters < config.max_newton_iters)
  {
    // Bordered system with the reduced gauge direction M_r (i y).
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(d + 1, d + 1);
    K.topLeftCorner(d, d) = basis.reduce(fine_system.hessian(c), false);
    Eigen::VectorXd iy(d);
    iy << -y.tail(m), y.head(m);
    const Eigen::VectorXd gauge = Mr * iy;
    K.block(0, d, d, 1) = gauge;
    K.block(d, 0, 1, d) = gauge.transpose();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d + 1);
    rhs.head(d) = -g_r;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(K);
    const Eigen::VectorXd step = lu.solve(rhs).head(d);
    if (!step.allFinite())
    {
      throw SolverError("LOD Newton step: singular bordered system");
    }
    Eigen::VectorXd y_new = y + step;
    Eigen::VectorXd c_new = basis.expand(y_new);
    Eigen::VectorXd g_new = reduced_residual(c_new);
    const double r_new = g_new.norm();
    const double E_new = fine_system.energy(c_new);
    ++report.newton_iters;
    const double change = scale * std::abs(E_new - E);
    if (std::isfinite(E_new) && change < config.delta_newton && r_new >= r)
    {
      return finish(true, "converged");
    }
    if (!std::isfinite(E_new) || (r_new > 10.0 * r && r_new > 0.0))
    {
      return finish(false, "Newton diverged: residual grew from " + std::to_string(r) + " to " +
                               std::to_string(r_new));
    }
    y = std::move(y_new);
    c = std::move(c_new);
    g_r = std::move(g_new);
    E = E_new;
    r = r_new;
    report.newton_energies.push_back(E);
    report.newton_residuals.push_back(r);
    if (change < config.delta_newton)
    {
      return finish(true, "converged");
    }
  }
  return finish(false, "Newton reached max_newton_iters");
}

std::vector<ConvergenceRecord> lod_study(const ReferenceSolution &ref,
                                         const std::vector<int> &coarse_levels,
                                         const SolverConfig &config)
{
  const GlSystem &fine = *ref.system;
  const double kappa = fine.kappa(), k2 = kappa * kappa;
  std::vector<ConvergenceRecord> records;
  for (std::size_t i = 0; i < coarse_levels.size(); ++i)
  {
    const int n = coarse_levels[i];
    if (i > 0 && n <= coarse_levels[i - 1])
    {
      throw std::invalid_argument("lod_study: levels must be strictly increasing");
    }
    const LodBasis basis = build_lod_basis(make_mesh(n), fine);
    const LodProjection proj = lod_ritz_project(ref.field, basis, fine);
    const MinimizeReport run = minimize_lod(ref.field, basis, fine, config);

    ConvergenceRecord rec;
    rec.kappa = kappa;
    rec.n = n;
    rec.h = 1.0 / n;
    rec.converged = run.converged;
    rec.field = run.field;
    rec.energy = run.final_energy;
    rec.hk1_norm = norms(run.field, kappa).hk1;
    rec.preasymptotic = kappa * rec.h >= 1.0;

    const PhaseAlignment aligned = align_phase(run.field, ref.field);
    rec.phase = aligned.phi;
    const NormReport err = norms(ref.field - aligned.aligned, kappa);
    rec.err_l2 = err.l2;
    rec.err_hk1 = err.hk1;
    rec.err_energy = run.final_energy - ref.energy;

    const NormReport proj_err = norms(ref.field - proj.field, kappa);
    rec.bestapprox_hk1 = proj_err.hk1;
    rec.bestapprox_l2 = proj_err.l2;
    rec.energy_bestapprox = fine.energy(proj.field.coefficients());

    const double s = k2 > 0.0 ? k2 : 1.0;
    rec.scaled_l2 = rec.err_l2 / s;
    rec.scaled_hk1 = rec.err_hk1 / s;
    rec.scaled_energy = rec.err_energy / (s * s);
    if (!records.empty())
    {
      const ConvergenceRecord &prev = records.back();
      const double lh = std::log(prev.h / rec.h);
      auto order = [&](double a, double b)
      { return a > 0.0 && b > 0.0 ? std::log(a / b) / lh : kNaN; };
      rec.order_l2 = order(prev.err_l2, rec.err_l2);
      rec.order_hk1 = order(prev.err_hk1, rec.err_hk1);
      rec.order_energy = order(prev.err_energy, rec.err_energy);
    }
    records.push_back(rec);
  }
  return records;
}

double fitted_order(const std::vector<double> &h, const std::vector<double> &errors)
{
  if (h.size() != errors.size() || h.size() < 2)
  {
    throw std::invalid_argument("fitted_order: need at least two (h, error) pairs");
  }
  const auto k = static_cast<double>(h.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i)
  {
    if (!(h[i] > 0.0) || !(errors[i] > 0.0))
    {
      return kNaN;
    }
    const double x = std::log(h[i]), y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace glfem
