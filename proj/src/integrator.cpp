#include "sacfem/integrator.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include "sacfem/errors.hpp"

namespace sacfem {

double ramp_factor(double t, double t_end) {
  if (!(t_end > 0)) throw std::invalid_argument("ramp_factor: t_end must be positive");
  return t <= t_end ? t / t_end : 1.0;
}

double LoadSpec::scale(double t) const {
  if (cutoff && t >= *cutoff) return 0.0;
  return ramp_factor(t, t_end);
}

LoadSpec LoadSpec::parametric(double alpha_f, double t_end) {
  LoadSpec load;
  load.body_force = Eigen::Vector3d(0.0, 0.0, -alpha_f);
  load.t_end = t_end;
  load.alpha_f = alpha_f;
  return load;
}

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

namespace {

/// Replaces constrained rows and columns by identity rows.
SparseMatrix constrain(const SparseMatrix& a, const std::vector<char>& fixed) {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()));
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      if (!fixed[static_cast<std::size_t>(it.row())] && !fixed[static_cast<std::size_t>(it.col())])
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i]) t.emplace_back(static_cast<int>(i), static_cast<int>(i), 1.0);
  SparseMatrix out(a.rows(), a.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

std::vector<char> fixed_mask(Eigen::Index n, const std::vector<int>& constrained) {
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  for (int i : constrained) {
    if (i < 0 || i >= n) throw std::invalid_argument("constrained dof out of range");
    fixed[static_cast<std::size_t>(i)] = 1;
  }
  return fixed;
}

}  // namespace

Eigen::VectorXd initial_acceleration(const SparseMatrix& M, const SparseMatrix& C, const SparseMatrix& K,
                                     const Eigen::VectorXd& d0, const Eigen::VectorXd& v0,
                                     const Eigen::VectorXd& f0, const std::vector<int>& constrained) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n || C.rows() != n || K.rows() != n || d0.size() != n || v0.size() != n || f0.size() != n)
    throw std::invalid_argument("initial_acceleration: size mismatch");
  const auto fixed = fixed_mask(n, constrained);
  Eigen::VectorXd rhs = f0 - C * v0 - K * d0;
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i]) rhs[static_cast<Eigen::Index>(i)] = 0.0;
  if (rhs.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(n);

  const SparseMatrix m = constrained.empty() ? M : constrain(M, fixed);
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(1e-10);
  cg.setMaxIterations(10 * n);
  cg.compute(m);
  Eigen::VectorXd a = cg.solve(rhs);
  if (cg.info() != Eigen::Success || !a.allFinite())
    throw NumericalError("initial_acceleration: CG did not converge (residual " + std::to_string(cg.error()) +
                         " after " + std::to_string(cg.iterations()) + " iterations)");
  return a;
}

void central_difference_step(const Eigen::VectorXd& d_prev, const Eigen::VectorXd& d_prev2,
                             const Eigen::VectorXd& m_lumped, const Eigen::VectorXd& c_lumped,
                             const Eigen::VectorXd& f_int, const Eigen::VectorXd& f_ext, double dt,
                             Eigen::VectorXd& d_next) {
  const Eigen::Index n = m_lumped.size();
  if (d_prev.size() != n || d_prev2.size() != n || c_lumped.size() != n || f_int.size() != n ||
      f_ext.size() != n)
    throw std::invalid_argument("central_difference_step: size mismatch");
  const double half = 0.5 * dt;
  const double dt2 = dt * dt;
  d_next.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lhs = m_lumped[i] + half * c_lumped[i];
    if (!(lhs > 0.0)) throw InvalidStateError("central_difference_step: non-positive lumped entry at dof " +
                                              std::to_string(i));
    d_next[i] = (dt2 * (f_ext[i] - f_int[i]) + 2.0 * m_lumped[i] * d_prev[i] -
                 (m_lumped[i] - half * c_lumped[i]) * d_prev2[i]) /
                lhs;
  }
}

Eigen::VectorXd central_difference_step(const SimState& state, const Eigen::VectorXd& m_lumped,
                                        const Eigen::VectorXd& c_lumped, const Eigen::VectorXd& f_int,
                                        const Eigen::VectorXd& f_ext) {
  Eigen::VectorXd out;
  central_difference_step(state.d_prev, state.d_prev2, m_lumped, c_lumped, f_int, f_ext, state.dt, out);
  return out;
}

Eigen::VectorXd seed_previous_displacement(const Eigen::VectorXd& d0, const Eigen::VectorXd& v0,
                                           const Eigen::VectorXd& a0, double dt) {
  return d0 - dt * v0 + 0.5 * dt * dt * a0;
}

Eigen::VectorXd initial_previous_displacement(const Mesh& mesh, const Material& mat, const LoadSpec& load,
                                              double dt, const InitialConditions& ic) {
  const Eigen::Index n = mesh.n_dofs();
  const Eigen::VectorXd d0 = ic.d0.size() ? ic.d0 : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd v0 = ic.v0.size() ? ic.v0 : Eigen::VectorXd::Zero(n);
  if (d0.size() != n || v0.size() != n) throw std::invalid_argument("initial conditions: size mismatch");
  const double s0 = load.scale(0.0);
  if (d0.squaredNorm() == 0.0 && v0.squaredNorm() == 0.0 && s0 == 0.0) return d0;

  const Eigen::VectorXd rho = element_densities(mesh, mat, ic.rho_e);
  const SparseMatrix M = assemble_consistent_mass(mesh, rho);
  const SparseMatrix C = mat.alpha * M;
  const SparseMatrix K = assemble_stiffness(mesh, mat);
  const Eigen::VectorXd f0 = s0 * assemble_body_load(mesh, load.body_force);
  const Eigen::VectorXd a0 = initial_acceleration(M, C, K, d0, v0, f0, dirichlet_dofs(mesh));
  return seed_previous_displacement(d0, v0, a0, dt);
}

Trajectory serial_solve(const Mesh& mesh, const Material& mat, const LoadSpec& load, double dt, long n_steps,
                        const InitialConditions& ic) {
  if (!(dt > 0)) throw std::invalid_argument("serial_solve: dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("serial_solve: negative step count");
  const Eigen::Index n = mesh.n_dofs();
  std::vector<int> identity(static_cast<std::size_t>(mesh.n_nodes()));
  std::iota(identity.begin(), identity.end(), 0);
  std::vector<int> all(static_cast<std::size_t>(mesh.n_elems()));
  std::iota(all.begin(), all.end(), 0);
  const ElementBlock block(mesh, mat, all, identity, load.body_force, true);

  const Eigen::VectorXd rho = element_densities(mesh, mat, ic.rho_e);
  const Eigen::VectorXd m = assemble_lumped_mass(mesh, rho);
  const Eigen::VectorXd c = mat.alpha * m;
  const std::vector<int> fixed = dirichlet_dofs(mesh);

  Trajectory traj;
  traj.dt = dt;
  traj.d.resize(n, n_steps + 1);
  Eigen::VectorXd d_prev = ic.d0.size() ? ic.d0 : Eigen::VectorXd::Zero(n);
  for (int i : fixed) d_prev[i] = 0.0;
  Eigen::VectorXd d_prev2 = initial_previous_displacement(mesh, mat, load, dt, ic);
  traj.d.col(0) = d_prev;

  Eigen::VectorXd f_int(n), f_ext(n), d_next(n);
  for (long step = 1; step <= n_steps; ++step) {
    const double t = static_cast<double>(step) * dt;
    block.internal_force(d_prev, f_int);
    block.external_force(load.scale(t), f_ext);
    central_difference_step(d_prev, d_prev2, m, c, f_int, f_ext, dt, d_next);
    for (int i : fixed) d_next[i] = 0.0;
    if (!d_next.allFinite())
      throw InstabilityError(step, "serial_solve: non-finite displacement at step " + std::to_string(step));
    traj.d.col(step) = d_next;
    d_prev2.swap(d_prev);
    d_prev.swap(d_next);
  }
  return traj;
}

Eigen::VectorXd static_solve(const Mesh& mesh, const Material& mat, const Eigen::Vector3d& body_force) {
  const SparseMatrix K = assemble_stiffness(mesh, mat);
  const auto fixed_dofs = dirichlet_dofs(mesh);
  const auto fixed = fixed_mask(K.rows(), fixed_dofs);
  Eigen::VectorXd f = assemble_body_load(mesh, body_force);
  for (int i : fixed_dofs) f[i] = 0.0;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(constrain(K, fixed));
  if (ldlt.info() != Eigen::Success) throw NumericalError("static_solve: factorization failed");
  Eigen::VectorXd d = ldlt.solve(f);
  if (!d.allFinite()) throw NumericalError("static_solve: non-finite solution");
  return d;
}

}  // namespace sacfem
