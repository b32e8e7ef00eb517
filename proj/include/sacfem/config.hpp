#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sacfem/comm.hpp"
#include "sacfem/integrator.hpp"
#include "sacfem/material.hpp"
#include "sacfem/stability.hpp"

namespace sacfem {

/// Flat key=value run configuration shared by every CLI subcommand.
struct RunConfig {
  // material
  double E = 1.0e6;
  double nu = 0.3;
  double rho = 1.0;
  double alpha = 0.5;
  double alpha_s = 0.9;
  double beta = 1.0;
  SizeMeasure h_measure = SizeMeasure::Insphere;
  // geometry, used when no mesh file is given
  double L = 25.0, W = 1.0, H = 1.0;
  int nx = 25, ny = 1, nz = 1;
  // load
  double fx = 0.0, fy = 0.0, fz = -0.5;
  double t_end = 1.0;
  std::optional<double> discontinuous_cutoff;
  double alpha_f_min = 0.3, alpha_f_max = 0.7;
  int n_loads = 10;
  int n_ics = 0;
  // solver
  std::optional<double> dt;
  long n_T = 20000;
  AssemblyMode mode = AssemblyMode::PreAssembled;
  int cores = 2;
  double latency_us = 0.0;
  // network
  int k = 2;
  int n_H = 100;
  int n_p = 20, n_f = 20, n_s = 80;
  double n_ts = 0.5;
  int n_B = 5;
  double eta0 = 5.0e-4;
  double gamma = 0.9995;
  double eta_min = 5.0e-7;
  std::uint64_t seed = 1;
  bool conditional = false;
  int n_rep = 12;
  // sync-avoiding
  std::optional<long> n_cri;

  Material material() const;
  LoadSpec load() const;
  long resolved_n_cri() const { return n_cri ? *n_cri : static_cast<long>(n_p) * n_s + 1; }
};

/// Parses `key = value` lines; '#' starts a comment. Unknown keys, malformed
/// lines and out-of-range values throw std::invalid_argument naming the key.
RunConfig parse_config_string(const std::string& text);
RunConfig parse_config(const std::string& path);

/// Every key with its current value, one per line, in a fixed order.
std::string emit_config(const RunConfig& cfg);

/// FNV-1a hash of emit_config, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

void validate(const RunConfig& cfg);

}  // namespace sacfem
