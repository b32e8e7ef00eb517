#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sacfem {

using Tet = std::array<int, 4>;

/// Tetrahedral mesh. Coordinates in cm, one column per node.
struct Mesh {
  Eigen::Matrix3Xd nodes;
  std::vector<Tet> tets;
  std::vector<int> dirichlet_nodes;  ///< sorted, fully clamped nodes

  int n_nodes() const { return static_cast<int>(nodes.cols()); }
  int n_elems() const { return static_cast<int>(tets.size()); }
  int n_dofs() const { return 3 * n_nodes(); }

  /// 3x4 matrix of the vertex coordinates of element `e`.
  Eigen::Matrix<double, 3, 4> element_coords(int e) const;
};

/// Structured box [0,L]x[0,W]x[0,H] split into six tetrahedra per cell; nodes
/// at x = 0 are clamped.
Mesh generate_beam_mesh(double L, double W, double H, int nx, int ny, int nz);

template <typename Scalar>
Scalar tet_signed_volume(const Eigen::Matrix<Scalar, 3, 4>& x) {
  Eigen::Matrix<Scalar, 3, 3> j;
  j.col(0) = x.col(1) - x.col(0);
  j.col(1) = x.col(2) - x.col(0);
  j.col(2) = x.col(3) - x.col(0);
  return j.determinant() / Scalar(6);
}

/// Diameter of the circumscribed sphere. Falls back to the longest edge for
/// degenerate tetrahedra (`degenerate` is set when that happens).
double circumsphere_diameter(const Eigen::Matrix<double, 3, 4>& x, bool* degenerate = nullptr);

/// Diameter of the inscribed sphere, 6 V / (sum of face areas).
double insphere_diameter(const Eigen::Matrix<double, 3, 4>& x);

double mesh_volume(const Mesh& mesh);

void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

}  // namespace sacfem
