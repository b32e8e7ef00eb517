#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sacfem/assembly.hpp"
#include "sacfem/material.hpp"
#include "sacfem/mesh.hpp"

namespace sacfem {

/// Linear ramp: t / t_end up to t_end, then 1.
double ramp_factor(double t, double t_end);

/// Uniform body force with a ramp and an optional switch-off time.
struct LoadSpec {
  Eigen::Vector3d body_force{0.0, 0.0, -0.5};  ///< [dynes/cm^3]
  double t_end = 1.0;                          ///< ramp length [s]
  std::optional<double> cutoff;                ///< load is zero for t >= cutoff
  /// Parametric load magnitude; informational, already folded into body_force.
  std::optional<double> alpha_f;

  double scale(double t) const;
  /// Downward load of magnitude alpha_f along z.
  static LoadSpec parametric(double alpha_f, double t_end = 1.0);
};

/// Displacement history, one column per step n = 0 .. n_steps.
struct Trajectory {
  double dt = 0.0;
  Eigen::MatrixXd d;

  long n_rows() const { return static_cast<long>(d.cols()); }
  long n_dofs() const { return static_cast<long>(d.rows()); }
};

/// State carried by the two-level recursion.
struct SimState {
  Eigen::VectorXd d_prev2;  ///< d^(n-2)
  Eigen::VectorXd d_prev;   ///< d^(n-1)
  long step = 0;            ///< index n of the next displacement to compute
  double dt = 0.0;

  double time() const { return static_cast<double>(step) * dt; }
};

/// Solves M a0 = f0 - C v0 - K d0 with diagonally preconditioned CG
/// (relative residual 1e-10, at most 10 n iterations). Dofs listed in
/// `constrained` get zero acceleration.
Eigen::VectorXd initial_acceleration(const SparseMatrix& M, const SparseMatrix& C, const SparseMatrix& K,
                                     const Eigen::VectorXd& d0, const Eigen::VectorXd& v0,
                                     const Eigen::VectorXd& f0, const std::vector<int>& constrained = {});

/// d^(n) = (M + dt/2 C)^-1 [dt^2 (f_ext - f_int) + 2 M d^(n-1) - (M - dt/2 C) d^(n-2)]
/// with diagonal M and C.
void central_difference_step(const Eigen::VectorXd& d_prev, const Eigen::VectorXd& d_prev2,
                             const Eigen::VectorXd& m_lumped, const Eigen::VectorXd& c_lumped,
                             const Eigen::VectorXd& f_int, const Eigen::VectorXd& f_ext, double dt,
                             Eigen::VectorXd& d_next);

Eigen::VectorXd central_difference_step(const SimState& state, const Eigen::VectorXd& m_lumped,
                                        const Eigen::VectorXd& c_lumped, const Eigen::VectorXd& f_int,
                                        const Eigen::VectorXd& f_ext);

/// d^(-1) = d0 - dt v0 + dt^2/2 a0.
Eigen::VectorXd seed_previous_displacement(const Eigen::VectorXd& d0, const Eigen::VectorXd& v0,
                                           const Eigen::VectorXd& a0, double dt);

struct InitialConditions {
  Eigen::VectorXd d0;     ///< empty means zero
  Eigen::VectorXd v0;     ///< empty means zero
  Eigen::VectorXd rho_e;  ///< per-element density (mass scaling); empty means material rho
};

/// Global d^(-1) for the given initial conditions (consistent-mass initial
/// acceleration solve).
Eigen::VectorXd initial_previous_displacement(const Mesh& mesh, const Material& mat, const LoadSpec& load,
                                              double dt, const InitialConditions& ic);

/// Full-mesh explicit solve for n_steps steps; returns n_steps + 1 columns.
Trajectory serial_solve(const Mesh& mesh, const Material& mat, const LoadSpec& load, double dt, long n_steps,
                        const InitialConditions& ic = {});

/// Static equilibrium K d = f at the fully applied load (sparse LDLT on the
/// free dofs).
Eigen::VectorXd static_solve(const Mesh& mesh, const Material& mat, const Eigen::Vector3d& body_force);

bool all_finite(const Eigen::VectorXd& v);

}  // namespace sacfem
