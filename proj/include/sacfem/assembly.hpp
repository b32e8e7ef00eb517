#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "sacfem/element.hpp"
#include "sacfem/material.hpp"
#include "sacfem/mesh.hpp"

namespace sacfem {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Per-element densities, defaulting to the material density.
Eigen::VectorXd element_densities(const Mesh& mesh, const Material& mat, const Eigen::VectorXd& rho_e = {});

Eigen::VectorXd assemble_lumped_mass(const Mesh& mesh, const Eigen::VectorXd& rho_e);
SparseMatrix assemble_consistent_mass(const Mesh& mesh, const Eigen::VectorXd& rho_e);
SparseMatrix assemble_stiffness(const Mesh& mesh, const Material& mat);
Eigen::VectorXd assemble_body_load(const Mesh& mesh, const Eigen::Vector3d& body_force);

/// Constrained dof ids (all three components of every clamped node), sorted.
std::vector<int> dirichlet_dofs(const Mesh& mesh);

/// Element-level kernels for a subset of elements acting on a local dof
/// numbering. Element order is preserved, so the floating-point accumulation
/// order at a node matches a serial sweep over the same elements.
class ElementBlock {
 public:
  /// `node_to_local` maps global node id to local node id (-1 when absent).
  ElementBlock(const Mesh& mesh, const Material& mat, std::vector<int> elems, std::span<const int> node_to_local,
               const Eigen::Vector3d& body_force, bool pre_assembled);

  /// Recomputes element stiffness and load; a no-op when pre-assembled.
  void form_element_quantities();

  /// f_int = sum_e K_e d_e, scattered into `f_int` (overwritten).
  void internal_force(const Eigen::VectorXd& d, Eigen::VectorXd& f_int) const;
  /// f_ext = scale * sum_e f_e (overwritten).
  void external_force(double scale, Eigen::VectorXd& f_ext) const;

  bool pre_assembled() const { return pre_assembled_; }
  std::size_t size() const { return elems_.size(); }

 private:
  const Mesh* mesh_;
  Material mat_;
  Eigen::Vector3d body_force_;
  std::vector<int> elems_;
  std::vector<std::array<int, 12>> dofs_;
  std::vector<Matrix12<double>, Eigen::aligned_allocator<Matrix12<double>>> stiffness_;
  std::vector<Vector12<double>, Eigen::aligned_allocator<Vector12<double>>> load_;
  bool pre_assembled_;
};

}  // namespace sacfem
