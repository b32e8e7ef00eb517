#include "sacfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <Eigen/Geometry>

namespace sacfem {

Eigen::Matrix<double, 3, 4> Mesh::element_coords(int e) const {
  Eigen::Matrix<double, 3, 4> x;
  const Tet& t = tets[static_cast<std::size_t>(e)];
  for (int a = 0; a < 4; ++a) x.col(a) = nodes.col(t[a]);
  return x;
}

Mesh generate_beam_mesh(double L, double W, double H, int nx, int ny, int nz) {
  if (nx < 1 || ny < 1 || nz < 1)
    throw std::invalid_argument("generate_beam_mesh: cell counts must be >= 1");
  if (!(L > 0) || !(W > 0) || !(H > 0))
    throw std::invalid_argument("generate_beam_mesh: dimensions must be positive");

  const int px = nx + 1, py = ny + 1, pz = nz + 1;
  auto id = [&](int i, int j, int k) { return i + px * (j + py * k); };

  Mesh mesh;
  mesh.nodes.resize(3, px * py * pz);
  for (int k = 0; k < pz; ++k)
    for (int j = 0; j < py; ++j)
      for (int i = 0; i < px; ++i)
        mesh.nodes.col(id(i, j, k)) << L * i / nx, W * j / ny, H * k / nz;

  // Kuhn split: each tet follows one monotone path from the low corner to the
  // high corner of the cell, so all cells share the same face diagonals.
  static constexpr std::array<std::array<int, 3>, 6> kPaths{{
      {0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};
  mesh.tets.reserve(static_cast<std::size_t>(6) * nx * ny * nz);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        for (const auto& path : kPaths) {
          std::array<int, 3> c{i, j, k};
          Tet t;
          t[0] = id(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[path[s]];
            t[s + 1] = id(c[0], c[1], c[2]);
          }
          Eigen::Matrix<double, 3, 4> x;
          for (int a = 0; a < 4; ++a) x.col(a) = mesh.nodes.col(t[a]);
          if (tet_signed_volume(x) < 0) std::swap(t[1], t[2]);
          mesh.tets.push_back(t);
        }

  for (int k = 0; k < pz; ++k)
    for (int j = 0; j < py; ++j) mesh.dirichlet_nodes.push_back(id(0, j, k));
  std::sort(mesh.dirichlet_nodes.begin(), mesh.dirichlet_nodes.end());
  return mesh;
}

double insphere_diameter(const Eigen::Matrix<double, 3, 4>& x) {
  static constexpr int faces[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
  double area = 0.0;
  for (const auto& f : faces)
    area += 0.5 * (x.col(f[1]) - x.col(f[0])).cross(x.col(f[2]) - x.col(f[0])).norm();
  return area > 0.0 ? 6.0 * std::abs(tet_signed_volume(x)) / area : 0.0;
}

double circumsphere_diameter(const Eigen::Matrix<double, 3, 4>& x, bool* degenerate) {
  const Eigen::Vector3d u = x.col(1) - x.col(0);
  const Eigen::Vector3d v = x.col(2) - x.col(0);
  const Eigen::Vector3d w = x.col(3) - x.col(0);
  const double denom = 2.0 * u.dot(v.cross(w));

  double longest = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) longest = std::max(longest, (x.col(a) - x.col(b)).norm());

  if (std::abs(denom) <= 1e-14 * longest * longest * longest) {
    if (degenerate) *degenerate = true;
    return longest;
  }
  if (degenerate) *degenerate = false;
  const Eigen::Vector3d offset =
      (u.squaredNorm() * v.cross(w) + v.squaredNorm() * w.cross(u) + w.squaredNorm() * u.cross(v)) / denom;
  return 2.0 * offset.norm();
}

double mesh_volume(const Mesh& mesh) {
  double total = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) total += tet_signed_volume(mesh.element_coords(e));
  return total;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << std::setprecision(17);
  os << "nodes " << mesh.n_nodes() << '\n';
  for (int i = 0; i < mesh.n_nodes(); ++i)
    os << mesh.nodes(0, i) << ' ' << mesh.nodes(1, i) << ' ' << mesh.nodes(2, i) << '\n';
  os << "tets " << mesh.n_elems() << '\n';
  for (const Tet& t : mesh.tets) os << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << t[3] << '\n';
  os << "dirichlet " << mesh.dirichlet_nodes.size() << '\n';
  for (int n : mesh.dirichlet_nodes) os << n << '\n';
}

namespace {

long read_section(std::istream& is, const std::string& name) {
  std::string tag;
  long count = -1;
  if (!(is >> tag >> count) || tag != name || count < 0)
    throw std::runtime_error("mesh file: expected '" + name + " <count>'");
  return count;
}

}  // namespace

Mesh read_mesh(std::istream& is) {
  Mesh mesh;
  const long n = read_section(is, "nodes");
  mesh.nodes.resize(3, n);
  for (long i = 0; i < n; ++i)
    if (!(is >> mesh.nodes(0, i) >> mesh.nodes(1, i) >> mesh.nodes(2, i)))
      throw std::runtime_error("mesh file: truncated node list");
  const long m = read_section(is, "tets");
  mesh.tets.resize(static_cast<std::size_t>(m));
  for (Tet& t : mesh.tets) {
    if (!(is >> t[0] >> t[1] >> t[2] >> t[3])) throw std::runtime_error("mesh file: truncated tet list");
    for (int a : t)
      if (a < 0 || a >= n) throw std::runtime_error("mesh file: tet references unknown node");
  }
  const long k = read_section(is, "dirichlet");
  mesh.dirichlet_nodes.resize(static_cast<std::size_t>(k));
  for (int& d : mesh.dirichlet_nodes) {
    if (!(is >> d)) throw std::runtime_error("mesh file: truncated dirichlet list");
    if (d < 0 || d >= n) throw std::runtime_error("mesh file: dirichlet node out of range");
  }
  std::sort(mesh.dirichlet_nodes.begin(), mesh.dirichlet_nodes.end());
  return mesh;
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_mesh(os, mesh);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open mesh file " + path);
  return read_mesh(is);
}

}  // namespace sacfem
