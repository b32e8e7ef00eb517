#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sacfem/nn/encdec.hpp"
#include "sacfem/pipeline/dataset.hpp"

namespace sacfem::pipeline {

/// Anything that maps n_p sampled states to the next n_f sampled states.
class SequenceModel {
 public:
  virtual ~SequenceModel() = default;
  virtual int n_dof() const = 0;
  virtual int n_p() const = 0;
  virtual int n_f() const = 0;
  /// X is n_dof x n_p in physical units. `first_step` and `stride` locate the
  /// requested outputs on the solver's step axis; learned models ignore them.
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& X, long first_step, long stride) const = 0;
};

/// Learned encoder-decoder, optionally conditioned on a fixed load parameter.
class EncDecModel final : public SequenceModel {
 public:
  explicit EncDecModel(nn::EncDecParams params, std::optional<double> alpha_f = std::nullopt);
  int n_dof() const override { return params_.dims.n_dof; }
  int n_p() const override { return params_.dims.n_p; }
  int n_f() const override { return params_.dims.n_f; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X, long first_step, long stride) const override;
  const nn::EncDecParams& params() const { return params_; }

 private:
  nn::EncDecParams params_;
  std::optional<double> alpha_f_;
};

/// Returns recorded values; columns of `history` are solver steps.
class ReplayModel final : public SequenceModel {
 public:
  ReplayModel(Eigen::MatrixXd history, int n_p, int n_f);
  int n_dof() const override { return static_cast<int>(history_.rows()); }
  int n_p() const override { return n_p_; }
  int n_f() const override { return n_f_; }
  Eigen::MatrixXd predict(const Eigen::MatrixXd& X, long first_step, long stride) const override;

 private:
  Eigen::MatrixXd history_;
  int n_p_, n_f_;
};

/// Recursive error on the sampled series `series` (n_dof x m, physical units):
/// the first input window is series columns [i - n_p, i); each further
/// application reads the latest n_p entries of the partially predicted series.
/// Returns the mean squared error over N * n_f predicted columns.
double e_mse(const SequenceModel& model, const Eigen::MatrixXd& series, long i, int N);

/// Sampled series (columns steps 0, n_s, 2 n_s, ...) of the given dofs.
Eigen::MatrixXd sampled_series(const Eigen::MatrixXd& history, int n_s);

struct RefillSet {
  std::vector<long> inputs;   ///< n_p steps
  std::vector<long> outputs;  ///< n_f steps
};

/// Index sets for i = 1 .. n_s at next step n.
std::vector<RefillSet> refill_index_sets(long n, int n_p, int n_f, int n_s);

/// Predictions for steps n .. n + n_s n_f - 1 (one column each). `history`
/// columns are steps; `rows` selects dofs (empty means all rows).
Eigen::MatrixXd refill_predict(const SequenceModel& model, const Eigen::MatrixXd& history,
                               const std::vector<int>& rows, long n, int n_s);

}  // namespace sacfem::pipeline
