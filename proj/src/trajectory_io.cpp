#include "sacfem/trajectory_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace sacfem {

namespace binio {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

void put_u64(std::ostream& os, std::uint64_t v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }
void put_f64(std::ostream& os, double v) { os.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& is) {
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("binary read: truncated header");
  return v;
}

double get_f64(std::istream& is) {
  double v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("binary read: truncated header");
  return v;
}

void put_f64s(std::ostream& os, const double* data, std::size_t n) {
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(double)));
}

void get_f64s(std::istream& is, double* data, std::size_t n) {
  if (!is.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(n * sizeof(double))))
    throw std::runtime_error("binary read: truncated payload");
}

}  // namespace binio

void write_trajectory(std::ostream& os, const Trajectory& traj) {
  binio::put_u64(os, kTrajectoryMagic);
  binio::put_u64(os, static_cast<std::uint64_t>(traj.n_rows()));
  binio::put_u64(os, static_cast<std::uint64_t>(traj.n_dofs()));
  binio::put_f64(os, traj.dt);
  // Column-major storage with one column per step is exactly the row layout.
  binio::put_f64s(os, traj.d.data(), static_cast<std::size_t>(traj.d.size()));
}

Trajectory read_trajectory(std::istream& is) {
  if (binio::get_u64(is) != kTrajectoryMagic) throw std::runtime_error("not a trajectory file (bad magic)");
  const auto rows = binio::get_u64(is);
  const auto dofs = binio::get_u64(is);
  Trajectory traj;
  traj.dt = binio::get_f64(is);
  traj.d.resize(static_cast<Eigen::Index>(dofs), static_cast<Eigen::Index>(rows));
  binio::get_f64s(is, traj.d.data(), static_cast<std::size_t>(traj.d.size()));
  return traj;
}

void write_trajectory_file(const std::string& path, const Trajectory& traj) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_trajectory(os, traj);
}

Trajectory read_trajectory_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open trajectory file " + path);
  return read_trajectory(is);
}

std::uint64_t peek_magic(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::uint64_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), sizeof v)) return 0;
  return v;
}

}  // namespace sacfem
