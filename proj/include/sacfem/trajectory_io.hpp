#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "sacfem/integrator.hpp"

namespace sacfem {

/// Little-endian binary layout: u64 magic, u64 n_rows, u64 n_dof, f64 dt,
/// then n_rows rows of n_dof f64 values (one row per step).
inline constexpr std::uint64_t kTrajectoryMagic = 0x314a415254434153ULL;  // "SACTRAJ1"

void write_trajectory(std::ostream& os, const Trajectory& traj);
Trajectory read_trajectory(std::istream& is);
void write_trajectory_file(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_file(const std::string& path);

/// Reads the first eight bytes of a file (0 when unreadable).
std::uint64_t peek_magic(const std::string& path);

namespace binio {

void put_u64(std::ostream& os, std::uint64_t v);
void put_f64(std::ostream& os, double v);
std::uint64_t get_u64(std::istream& is);
double get_f64(std::istream& is);
void put_f64s(std::ostream& os, const double* data, std::size_t n);
void get_f64s(std::istream& is, double* data, std::size_t n);

}  // namespace binio

}  // namespace sacfem
