// SPDX-License-Identifier: Apache-2.0

#ifndef GLFEM_MINIMIZE_HPP
#define GLFEM_MINIMIZE_HPP

#include <optional>
#include <string>
#include <vector>
#include "glfem/assembly.hpp"
#include "glfem/field.hpp"
#include "glfem/linear_solve.hpp"

namespace glfem
{

struct SolverConfig
{
  std::optional<double> tau;  // empty: kappa^-2
  double delta_gf = 1e-9;
  double delta_newton = 1e-12;
  int max_gf_iters = 50000;
  int max_newton_iters = 50;
  double linear_tol = 1e-12;
  int log_every = 0;  // gradient-flow progress line every k steps on std::clog; 0 = silent

  // Auto step is kappa^-2 (1 for kappa = 0).
  double resolved_tau(double kappa) const;
  void validate() const;
};

struct MinimizeReport
{
  ComplexField field;
  std::vector<double> energy_history;  // E(u^0), ..., one entry per gradient-flow step
  std::vector<double> newton_energies;
  std::vector<double> newton_residuals;  // |E'(u)|_2 before each Newton step and at the end
  int gf_iters = 0;
  int newton_iters = 0;
  double final_residual_norm = 0.0;
  double final_energy = 0.0;
  bool converged = false;
  std::string message;
};

// Round-off level of |E'(u)|_2 at coefficients c: 16 eps |A_A|_inf |c|_2. Newton stops
// without a solve below it.
double residual_floor(const GlSystem &system, const Eigen::VectorXd &c);

// Scale of the stopping criterion: kappa^-2 |E(u^{n+1}) - E(u^n)| (plain |dE| for kappa = 0).
double energy_change_scale(double kappa);

//
// One linearized implicit Euler step of the L2 gradient flow,
//
//   [M + tau A_A + tau kappa^2 (W(|u^n|^2) - M)] u^{n+1} = M u^n,
//
// with block-diagonal M and W. Holds the assembled system and the reused factorization.
//
class GradientFlow
{
public:
  GradientFlow(const GlSystem &system, double tau, double linear_tol = 1e-12);

  Eigen::VectorXd step(const Eigen::VectorXd &c) const;
  // The step matrix for coefficients c (exposed for reduced-space flows).
  SparseMatrix step_matrix(const Eigen::VectorXd &c) const;
  double tau() const { return tau_; }

private:
  const GlSystem &system_;
  double tau_;
  SparseMatrix fixed_;  // (1 - tau kappa^2) M + tau A_A
  mutable SymmetricSolver solver_;
};

//
// Newton step for E'(u) = 0 with the gauge direction removed by the bordered system
//
//   [ E''(u)  g ] [delta]   [-E'(u)]
//   [ g^T     0 ] [ mu  ] = [   0  ],   g = M (coefficients of i u).
//
class GaugeNewton
{
public:
  explicit GaugeNewton(const GlSystem &system, double linear_tol = 1e-12);

  Eigen::VectorXd increment(const Eigen::VectorXd &c) const;

private:
  const GlSystem &system_;
  mutable SymmetricSolver solver_;
};

ComplexField gradient_flow_step(const ComplexField &u_n, const Problem &problem, double tau);
ComplexField newton_step(const ComplexField &u, const Problem &problem);

// Gradient flow until kappa^-2 |dE| < delta_gf, then gauge-fixed Newton until
// kappa^-2 |dE| < delta_newton. Hitting an iteration cap returns converged = false.
MinimizeReport minimize(const ComplexField &initial, const Problem &problem,
                        const SolverConfig &config = {});
MinimizeReport minimize(const ComplexField &initial, const GlSystem &system,
                        const SolverConfig &config = {});

}  // namespace glfem

#endif  // GLFEM_MINIMIZE_HPP
