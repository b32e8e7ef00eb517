#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sacfem/integrator.hpp"
#include "sacfem/nn/encdec.hpp"

namespace sacfem::pipeline {

struct SampleConfig {
  int n_s = 80;
  int n_p = 20;
  int n_f = 20;
  double n_ts = 0.5;

  void check() const;
};

/// One training pair in physical units.
struct Window {
  Eigen::MatrixXd X;  ///< n_dof x n_p
  Eigen::MatrixXd Y;  ///< n_dof x n_f
  std::optional<double> alpha_f;
};

struct Dataset {
  int n_dof = 0;
  int n_p = 0;
  int n_f = 0;
  bool conditional = false;
  std::vector<Window> windows;

  /// Appends another dataset with identical dimensions.
  void append(const Dataset& other);
};

/// Step indices kept after subsampling: 0, n_s, 2 n_s, ... below
/// floor(n_ts * n_rows).
std::vector<long> sampled_steps(long n_rows, const SampleConfig& cfg);

/// Rows of `traj` restricted to `dofs`, sliding windows with unit stride over
/// the subsampled series. Throws std::invalid_argument when too short.
Dataset build_dataset(const Trajectory& traj, const std::vector<int>& dofs, const SampleConfig& cfg,
                      std::optional<double> alpha_f = std::nullopt);
/// Same on a matrix whose columns are already the steps of the selected dofs.
Dataset build_dataset(const Eigen::MatrixXd& history, const SampleConfig& cfg,
                      std::optional<double> alpha_f = std::nullopt);

/// Per-dof mean and standard deviation over every entry of every window;
/// near-constant dofs get scale 1.
nn::Normalization fit_normalization(const Dataset& data);

/// Normalized batch built from the listed windows.
nn::SeqBatch make_batch(const Dataset& data, const nn::Normalization& norm, const std::vector<std::size_t>& idx);

inline constexpr std::uint64_t kDatasetMagic = 0x3154455344434153ULL;  // "SACDSET1"

/// Header: u64 magic, n_windows, n_dof, n_p, n_f, conditional; then per
/// window X and Y column-major and, if conditional, alpha_f.
void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is);
void write_dataset_file(const std::string& path, const Dataset& data);
Dataset read_dataset_file(const std::string& path);

}  // namespace sacfem::pipeline
