// SPDX-License-Identifier: Apache-2.0

#include "glfem/study.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include "glfem/errors.hpp"
#include "glfem/io.hpp"
#include "glfem/linear_solve.hpp"

namespace glfem
{

ReferenceSolution reference_solution(const Problem &problem, int n_ref, const SolverConfig &config,
                                     std::complex<double> initial)
{
  MeshPtr mesh = make_mesh(n_ref);
  auto system = std::make_shared<const GlSystem>(problem, mesh);
  MinimizeReport report = minimize(ComplexField::constant(mesh, initial), *system, config);
  return make_reference(std::move(system), std::move(report));
}

ReferenceSolution make_reference(std::shared_ptr<const GlSystem> system, MinimizeReport report,
                                 bool verify)
{
  ReferenceSolution ref;
  ref.system = std::move(system);
  ref.report = std::move(report);
  ref.field = ref.report.field;
  ref.energy = ref.report.final_energy;
  if (!ref.report.converged)
  {
    ref.warning = "reference minimization did not converge: " + ref.report.message;
  }
  if (verify && ref.system->kappa() > 0.0)
  {
    ref.uniqueness = verify_local_uniqueness(ref.field, *ref.system);
    if (ref.uniqueness.verdict != Verdict::LocallyUnique)
    {
      ref.warning += (ref.warning.empty() ? "" : "; ") +
                     std::string("local uniqueness not certified: ") + ref.uniqueness.reason;
    }
  }
  return ref;
}

ReferenceSolution adopt_reference(const ComplexField &field, const Problem &problem, bool verify)
{
  ReferenceSolution ref;
  ref.system = std::make_shared<const GlSystem>(problem, field.mesh_ptr());
  ref.field = field;
  ref.energy = ref.system->energy(field.coefficients());
  ref.report.field = field;
  ref.report.final_energy = ref.energy;
  ref.report.final_residual_norm = ref.system->residual(field.coefficients()).norm();
  ref.report.converged = true;
  ref.report.energy_history.push_back(ref.energy);
  if (verify && problem.kappa > 0.0)
  {
    ref.uniqueness = verify_local_uniqueness(field, *ref.system);
    if (ref.uniqueness.verdict != Verdict::LocallyUnique)
    {
      ref.warning = "local uniqueness not certified: " + ref.uniqueness.reason;
    }
  }
  return ref;
}

SparseMatrix block_prolongation(const Mesh2D &coarse, const Mesh2D &fine)
{
  return block_diagonal(prolongation_matrix(coarse, fine));
}

ComplexField best_approx(const ComplexField &u_ref, MeshPtr coarse, const Problem &problem)
{
  const GlSystem system(problem, u_ref.mesh_ptr());
  return best_approx(u_ref, std::move(coarse), system);
}

ComplexField best_approx(const ComplexField &u_ref, MeshPtr coarse, const GlSystem &fine_system)
{
  const SparseMatrix P = block_prolongation(*coarse, u_ref.mesh());
  const SparseMatrix A = fine_system.ahat();
  const SparseMatrix AP = A * P;
  const SparseMatrix G = SparseMatrix(P.transpose()) * AP;
  const Eigen::VectorXd rhs = AP.transpose() * u_ref.coefficients();
  return ComplexField::from_coefficients(std::move(coarse),
                                         linear_solve(G, rhs, MatrixKind::PositiveDefinite));
}

namespace
{

double order(double e_prev, double e, double h_prev, double h)
{
  if (!(e_prev > 0.0) || !(e > 0.0))
  {
    return kNaN;
  }
  return std::log(e_prev / e) / std::log(h_prev / h);
}

}  // namespace

std::vector<ConvergenceRecord> convergence_study(const ReferenceSolution &ref,
                                                 const std::vector<int> &levels,
                                                 const SolverConfig &config)
{
  const GlSystem &fine = *ref.system;
  const Problem &problem = fine.problem();
  const double kappa = problem.kappa, k2 = kappa * kappa;
  const MeshPtr &fine_mesh = fine.mesh_ptr();
  for (std::size_t i = 0; i < levels.size(); ++i)
  {
    if (i > 0 && levels[i] <= levels[i - 1])
    {
      throw std::invalid_argument("convergence_study: levels must be strictly increasing");
    }
    if (!is_refinement_of(*fine_mesh, build_uniform(levels[i])))
    {
      throw NotNestedError("convergence_study: level n=" + std::to_string(levels[i]) +
                           " does not divide n_ref by a power of two");
    }
  }
  const NormReport ref_norms = norms(ref.field, kappa);

  std::vector<ConvergenceRecord> records;
  for (const int n : levels)
  {
    MeshPtr mesh = make_mesh(n);
    const GlSystem system(problem, mesh);
    const MinimizeReport run =
        minimize(restrict_interpolate(ref.field, mesh), system, config);

    ConvergenceRecord rec;
    rec.kappa = kappa;
    rec.n = n;
    rec.h = 1.0 / n;
    rec.converged = run.converged;
    rec.field = run.field;
    rec.energy = run.final_energy;
    rec.hk1_norm = norms(run.field, kappa).hk1;
    rec.preasymptotic = kappa * rec.h >= 1.0;

    const PhaseAlignment aligned = align_phase(prolong(run.field, fine_mesh), ref.field);
    rec.phase = aligned.phi;
    const NormReport err = norms(ref.field - aligned.aligned, kappa);
    rec.err_l2 = err.l2;
    rec.err_hk1 = err.hk1;
    rec.err_energy = run.final_energy - ref.energy;

    const ComplexField best = best_approx(ref.field, mesh, fine);
    const NormReport best_err = norms(ref.field - prolong(best, fine_mesh), kappa);
    rec.bestapprox_hk1 = best_err.hk1;
    rec.bestapprox_l2 = best_err.l2;
    rec.energy_bestapprox = system.energy(best.coefficients());

    if (k2 > 0.0)
    {
      rec.scaled_l2 = rec.err_l2 / k2;
      rec.scaled_hk1 = rec.err_hk1 / k2;
      rec.scaled_energy = rec.err_energy / (k2 * k2);
    }
    else
    {
      rec.scaled_l2 = rec.err_l2;
      rec.scaled_hk1 = rec.err_hk1;
      rec.scaled_energy = rec.err_energy;
    }
    // A rotated vortex pattern has matching energy but an O(1) field error.
    rec.symmetry_flag = std::abs(rec.err_energy) <= 1e-3 * std::max(std::abs(ref.energy), 1e-300) &&
                        rec.err_l2 > 0.5 * ref_norms.l2;
    if (!records.empty())
    {
      const ConvergenceRecord &prev = records.back();
      rec.order_l2 = order(prev.err_l2, rec.err_l2, prev.h, rec.h);
      rec.order_hk1 = order(prev.err_hk1, rec.err_hk1, prev.h, rec.h);
      rec.order_energy = order(prev.err_energy, rec.err_energy, prev.h, rec.h);
    }
    records.push_back(rec);
  }
  return records;
}

RateSummary headline_orders(const std::vector<ConvergenceRecord> &records)
{
  std::vector<double> hk1, l2, en;
  for (std::size_t i = 1; i < records.size(); ++i)
  {
    if (records[i].preasymptotic || records[i - 1].preasymptotic)
    {
      continue;
    }
    hk1.push_back(records[i].order_hk1);
    l2.push_back(records[i].order_l2);
    en.push_back(records[i].order_energy);
  }
  RateSummary s;
  s.samples = static_cast<int>(hk1.size());
  if (s.samples > 0)
  {
    s.hk1 = median(hk1);
    s.l2 = median(l2);
    s.energy = median(en);
  }
  return s;
}

std::string records_csv(const std::vector<ConvergenceRecord> &records,
                        const std::optional<std::string> &method)
{
  std::string out =
      "kappa,n,h,err_l2,err_hk1,err_energy,scaled_l2,scaled_hk1,scaled_energy,order_l2,order_hk1,"
      "order_energy,bestapprox_hk1,bestapprox_l2,preasymptotic_flag";
  if (method)
  {
    out += ",method";
  }
  out += '\n';
  for (const ConvergenceRecord &r : records)
  {
    out += format_double(r.kappa) + ',' + std::to_string(r.n);
    for (double v : {r.h, r.err_l2, r.err_hk1, r.err_energy, r.scaled_l2, r.scaled_hk1,
                     r.scaled_energy, r.order_l2, r.order_hk1, r.order_energy, r.bestapprox_hk1,
                     r.bestapprox_l2})
    {
      out += ',' + format_double(v);
    }
    out += r.preasymptotic ? ",1" : ",0";
    if (method)
    {
      out += ',' + *method;
    }
    out += '\n';
  }
  return out;
}

BoundsReport bounds_report(const ComplexField &u_h, const Problem &problem)
{
  const double kappa = problem.kappa, k2 = kappa * kappa;
  const NormReport nr = norms(u_h, kappa);
  BoundsReport b;
  b.energy = energy(u_h, problem);
  b.l2 = nr.l2;
  b.max_modulus = u_h.modulus().maxCoeff();
  if (kappa > 0.0)
  {
    b.energy_over_k2 = b.energy / k2;
    b.hk1_over_k = nr.hk1 / kappa;
    b.grad_over_k = nr.h1_semi / kappa;
  }
  if (b.energy > 0.25 * k2 * (1.0 + 1e-12) + 1e-300)
  {
    throw BoundViolation("bounds_report: E(u_h) = " + format_double(b.energy) +
                         " exceeds E(0) = kappa^2/4 = " + format_double(0.25 * k2));
  }
  if (b.l2 > 2.0 * (1.0 + 1e-12))
  {
    throw BoundViolation("bounds_report: |u_h|_L2 = " + format_double(b.l2) + " exceeds 2");
  }
  return b;
}

double median(std::vector<double> values)
{
  if (values.empty())
  {
    return kNaN;
  }
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

}  // namespace glfem
