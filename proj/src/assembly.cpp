#include "sacfem/assembly.hpp"

#include <stdexcept>

namespace sacfem {

Eigen::VectorXd element_densities(const Mesh& mesh, const Material& mat, const Eigen::VectorXd& rho_e) {
  if (rho_e.size() == 0) return Eigen::VectorXd::Constant(mesh.n_elems(), mat.rho);
  if (rho_e.size() != mesh.n_elems()) throw std::invalid_argument("per-element density size mismatch");
  return rho_e;
}

Eigen::VectorXd assemble_lumped_mass(const Mesh& mesh, const Eigen::VectorXd& rho_e) {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Vector12<double> me = element_lumped_mass(mesh.element_coords(e), rho_e[e], e);
    const Tet& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) m.segment<3>(3 * t[a]) += me.segment<3>(3 * a);
  }
  return m;
}

namespace {

template <typename ElementFn>
SparseMatrix assemble_matrix(const Mesh& mesh, ElementFn&& fn) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.n_elems()) * 144);
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Matrix12<double> ke = fn(e);
    const Tet& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) triplets.emplace_back(3 * t[a] + i, 3 * t[b] + j, ke(3 * a + i, 3 * b + j));
  }
  SparseMatrix k(mesh.n_dofs(), mesh.n_dofs());
  k.setFromTriplets(triplets.begin(), triplets.end());
  return k;
}

}  // namespace

SparseMatrix assemble_consistent_mass(const Mesh& mesh, const Eigen::VectorXd& rho_e) {
  return assemble_matrix(mesh, [&](int e) { return element_consistent_mass(mesh.element_coords(e), rho_e[e], e); });
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const Material& mat) {
  return assemble_matrix(mesh, [&](int e) { return element_stiffness(mesh.element_coords(e), mat, e); });
}

Eigen::VectorXd assemble_body_load(const Mesh& mesh, const Eigen::Vector3d& body_force) {
  Eigen::VectorXd f = Eigen::VectorXd::Zero(mesh.n_dofs());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const Vector12<double> fe = element_body_load(mesh.element_coords(e), body_force, e);
    const Tet& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) f.segment<3>(3 * t[a]) += fe.segment<3>(3 * a);
  }
  return f;
}

std::vector<int> dirichlet_dofs(const Mesh& mesh) {
  std::vector<int> out;
  out.reserve(3 * mesh.dirichlet_nodes.size());
  for (int n : mesh.dirichlet_nodes)
    for (int i = 0; i < 3; ++i) out.push_back(3 * n + i);
  return out;
}

ElementBlock::ElementBlock(const Mesh& mesh, const Material& mat, std::vector<int> elems,
                           std::span<const int> node_to_local, const Eigen::Vector3d& body_force, bool pre_assembled)
    : mesh_(&mesh), mat_(mat), body_force_(body_force), elems_(std::move(elems)), pre_assembled_(pre_assembled) {
  dofs_.reserve(elems_.size());
  for (int e : elems_) {
    std::array<int, 12> dofs{};
    const Tet& t = mesh.tets[static_cast<std::size_t>(e)];
    for (int a = 0; a < 4; ++a) {
      const int local = node_to_local[static_cast<std::size_t>(t[a])];
      if (local < 0) throw std::invalid_argument("ElementBlock: element node missing from local numbering");
      for (int i = 0; i < 3; ++i) dofs[static_cast<std::size_t>(3 * a + i)] = 3 * local + i;
    }
    dofs_.push_back(dofs);
  }
  stiffness_.resize(elems_.size());
  load_.resize(elems_.size());
  for (std::size_t k = 0; k < elems_.size(); ++k) {
    const auto x = mesh.element_coords(elems_[k]);
    stiffness_[k] = element_stiffness(x, mat_, elems_[k]);
    load_[k] = element_body_load(x, body_force_, elems_[k]);
  }
}

void ElementBlock::form_element_quantities() {
  if (pre_assembled_) return;
  for (std::size_t k = 0; k < elems_.size(); ++k) {
    const auto x = mesh_->element_coords(elems_[k]);
    stiffness_[k] = element_stiffness(x, mat_, elems_[k]);
    load_[k] = element_body_load(x, body_force_, elems_[k]);
  }
}

void ElementBlock::internal_force(const Eigen::VectorXd& d, Eigen::VectorXd& f_int) const {
  f_int.setZero();
  Vector12<double> de;
  for (std::size_t k = 0; k < elems_.size(); ++k) {
    const auto& dofs = dofs_[k];
    for (int i = 0; i < 12; ++i) de[i] = d[dofs[static_cast<std::size_t>(i)]];
    const Vector12<double> fe = stiffness_[k] * de;
    for (int i = 0; i < 12; ++i) f_int[dofs[static_cast<std::size_t>(i)]] += fe[i];
  }
}

void ElementBlock::external_force(double scale, Eigen::VectorXd& f_ext) const {
  f_ext.setZero();
  if (scale == 0.0) return;
  for (std::size_t k = 0; k < elems_.size(); ++k) {
    const auto& dofs = dofs_[k];
    for (int i = 0; i < 12; ++i) f_ext[dofs[static_cast<std::size_t>(i)]] += scale * load_[k][i];
  }
}

}  // namespace sacfem
