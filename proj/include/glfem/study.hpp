// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_STUDY_HPP
#define GLFEM_STUDY_HPP

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include "glfem/assembly.hpp"
#include "glfem/field.hpp"
#include "glfem/minimize.hpp"
#include "glfem/spectrum.hpp"

namespace glfem
{

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct ConvergenceRecord
{
  double kappa = 0.0;
  int n = 0;
  double h = 0.0;
  double err_l2 = 0.0;
  double err_hk1 = 0.0;
  double err_energy = 0.0;  // E(u_h) - E(u_ref)
  double scaled_l2 = 0.0;   // / kappa^2
  double scaled_hk1 = 0.0;  // / kappa^2
  double scaled_energy = 0.0;  // / kappa^4
  double order_l2 = kNaN;
  double order_hk1 = kNaN;
  double order_energy = kNaN;
  double bestapprox_hk1 = 0.0;
  double bestapprox_l2 = 0.0;
  bool preasymptotic = false;  // kappa h >= 1

  // Diagnostics not part of the CSV schema.
  double energy = 0.0;
  double energy_bestapprox = 0.0;
  double hk1_norm = 0.0;
  double phase = 0.0;
  bool converged = false;
  bool symmetry_flag = false;  // energy agrees but the field does not (rotated pattern)
  ComplexField field;          // the level's minimizer
};

struct ReferenceSolution
{
  std::shared_ptr<const GlSystem> system;  // fine-mesh assembly, reused by the study
  ComplexField field;
  MinimizeReport report;
  UniquenessReport uniqueness;
  double energy = 0.0;
  std::string warning;
};

// Minimizer on the n_ref mesh from u_0 = 0.8 + 0.6i, certified by the eigenvalue test.
ReferenceSolution reference_solution(const Problem &problem, int n_ref, const SolverConfig &config,
                                     std::complex<double> initial = {0.8, 0.6});

// Wraps a finished minimization on system's mesh, optionally certified.
ReferenceSolution make_reference(std::shared_ptr<const GlSystem> system, MinimizeReport report,
                                 bool verify = true);

// Wraps an already computed reference field (e.g. read from a field file); the eigenvalue
// certificate is computed when verify is set.
ReferenceSolution adopt_reference(const ComplexField &field, const Problem &problem, bool verify);

// a-hat_kappa Ritz projection of u_ref onto the coarse P1 space, computed through the exact
// prolongation P: (P^T A P) r = P^T A u_ref with A = a-hat_kappa on the fine mesh.
ComplexField best_approx(const ComplexField &u_ref, MeshPtr coarse, const Problem &problem);
ComplexField best_approx(const ComplexField &u_ref, MeshPtr coarse, const GlSystem &fine_system);

// Block prolongation diag(P, P) acting on [re; im].
SparseMatrix block_prolongation(const Mesh2D &coarse, const Mesh2D &fine);

// For every level: minimize from the restricted reference, align the phase against the
// reference, measure all errors on the reference mesh and compare with the best
// approximation. Orders are log(e_prev / e) / log(h_prev / h).
std::vector<ConvergenceRecord> convergence_study(const ReferenceSolution &ref,
                                                 const std::vector<int> &levels,
                                                 const SolverConfig &config);

struct RateSummary
{
  double hk1 = kNaN, l2 = kNaN, energy = kNaN;
  int samples = 0;
};

// Median observed orders over consecutive level pairs with kappa h < 1 on both levels.
RateSummary headline_orders(const std::vector<ConvergenceRecord> &records);

// Fixed column order: kappa,n,h,err_l2,err_hk1,err_energy,scaled_l2,scaled_hk1,scaled_energy,
// order_l2,order_hk1,order_energy,bestapprox_hk1,bestapprox_l2,preasymptotic_flag
// (plus a trailing method column when given).
std::string records_csv(const std::vector<ConvergenceRecord> &records,
                        const std::optional<std::string> &method = std::nullopt);

struct BoundsReport
{
  double energy = 0.0;
  double energy_over_k2 = kNaN;
  double hk1_over_k = kNaN;
  double grad_over_k = kNaN;
  double l2 = 0.0;
  double max_modulus = 0.0;
};

// a-priori bounds of discrete minimizers; throws BoundViolation unless E(u_h) <= kappa^2/4 and
// |u_h|_L2 <= 2 (relative slack 1e-12 for round-off).
BoundsReport bounds_report(const ComplexField &u_h, const Problem &problem);

double median(std::vector<double> values);

}  // namespace glfem

#endif  // GLFEM_STUDY_HPP
