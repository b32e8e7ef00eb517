#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sacfem/errors.hpp"
#include "sacfem/material.hpp"
#include "sacfem/mesh.hpp"

namespace sacfem {

template <typename Scalar>
using Matrix12 = Eigen::Matrix<Scalar, 12, 12>;
template <typename Scalar>
using Vector12 = Eigen::Matrix<Scalar, 12, 1>;

constexpr double kDegenerateVolume = 1e-14;

namespace detail {

/// Gradients of the four barycentric shape functions, one column per vertex.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 4> shape_gradients(const Eigen::Matrix<Scalar, 3, 4>& x, Scalar& volume, int elem_id) {
  Eigen::Matrix<Scalar, 3, 3> j;
  j.col(0) = x.col(1) - x.col(0);
  j.col(1) = x.col(2) - x.col(0);
  j.col(2) = x.col(3) - x.col(0);
  volume = j.determinant() / Scalar(6);
  using std::abs;
  if (!(abs(volume) > Scalar(kDegenerateVolume)))
    throw DegenerateElementError(elem_id, "degenerate tetrahedron (element " + std::to_string(elem_id) + ")");
  const Eigen::Matrix<Scalar, 3, 3> jinv_t = j.inverse().transpose();
  Eigen::Matrix<Scalar, 3, 4> g;
  g.template rightCols<3>() = jinv_t;
  g.col(0) = -jinv_t.rowwise().sum();
  volume = abs(volume);
  return g;
}

}  // namespace detail

/// Constant-strain P1 stiffness, node-major dof layout (x, y, z per node).
template <typename Scalar>
Matrix12<Scalar> element_stiffness(const Eigen::Matrix<Scalar, 3, 4>& x, const Material& mat, int elem_id = -1) {
  Scalar volume;
  const Eigen::Matrix<Scalar, 3, 4> g = detail::shape_gradients(x, volume, elem_id);

  // Voigt order xx, yy, zz, xy, yz, zx with engineering shear strains.
  Eigen::Matrix<Scalar, 6, 12> b = Eigen::Matrix<Scalar, 6, 12>::Zero();
  for (int a = 0; a < 4; ++a) {
    const Scalar gx = g(0, a), gy = g(1, a), gz = g(2, a);
    const int c = 3 * a;
    b(0, c) = gx;
    b(1, c + 1) = gy;
    b(2, c + 2) = gz;
    b(3, c) = gy;
    b(3, c + 1) = gx;
    b(4, c + 1) = gz;
    b(4, c + 2) = gy;
    b(5, c) = gz;
    b(5, c + 2) = gx;
  }
  const Scalar mu(mat.mu), lambda(mat.lambda);
  Eigen::Matrix<Scalar, 6, 6> d = Eigen::Matrix<Scalar, 6, 6>::Zero();
  d.template topLeftCorner<3, 3>().setConstant(lambda);
  d.template topLeftCorner<3, 3>().diagonal().array() += Scalar(2) * mu;
  d.template bottomRightCorner<3, 3>().diagonal().setConstant(mu);

  Matrix12<Scalar> k = volume * (b.transpose() * d * b);
  return Scalar(0.5) * (k + k.transpose());
}

/// Row-sum lumped mass: rho * V / 4 on each of the 12 dofs.
template <typename Scalar>
Vector12<Scalar> element_lumped_mass(const Eigen::Matrix<Scalar, 3, 4>& x, Scalar rho, int elem_id = -1) {
  Scalar volume;
  detail::shape_gradients(x, volume, elem_id);
  return Vector12<Scalar>::Constant(rho * volume / Scalar(4));
}

/// Consistent P1 mass, rho V (1 + delta_ab) / 20 per direction.
template <typename Scalar>
Matrix12<Scalar> element_consistent_mass(const Eigen::Matrix<Scalar, 3, 4>& x, Scalar rho, int elem_id = -1) {
  Scalar volume;
  detail::shape_gradients(x, volume, elem_id);
  Matrix12<Scalar> m = Matrix12<Scalar>::Zero();
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const Scalar v = rho * volume * (a == b ? Scalar(2) : Scalar(1)) / Scalar(20);
      for (int i = 0; i < 3; ++i) m(3 * a + i, 3 * b + i) = v;
    }
  return m;
}

/// Body load `f` [dynes/cm^3] lumped to the vertices: V/4 * f per node.
template <typename Scalar>
Vector12<Scalar> element_body_load(const Eigen::Matrix<Scalar, 3, 4>& x, const Eigen::Matrix<Scalar, 3, 1>& f,
                                   int elem_id = -1) {
  Scalar volume;
  detail::shape_gradients(x, volume, elem_id);
  Vector12<Scalar> out;
  for (int a = 0; a < 4; ++a) out.template segment<3>(3 * a) = f * (volume / Scalar(4));
  return out;
}

}  // namespace sacfem
