#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sacfem/nn/lstm.hpp"

namespace sacfem::nn {

/// Per-dof affine map x_n = (x - shift) / scale.
struct Normalization {
  Eigen::VectorXd shift;
  Eigen::VectorXd scale;

  static Normalization identity(int n);
  Eigen::MatrixXd normalize(const Eigen::MatrixXd& x) const;
  Eigen::MatrixXd denormalize(const Eigen::MatrixXd& x) const;
};

struct ModelDims {
  int k = 2;
  int n_H = 100;
  int n_p = 20;
  int n_f = 20;
  int n_dof = 0;
  bool conditional = false;
  int n_rep = 12;

  int decoder_input() const { return n_dof + (conditional ? n_rep : 0); }
  void check() const;
};

enum Direction : int { kForward = 0, kBackward = 1 };

/// Encoder (k bidirectional layers), decoder cell with hidden size 2 n_H,
/// dense output layer and input normalization.
struct EncDecParams {
  ModelDims dims;
  std::vector<std::array<LstmCellParams, 2>> encoder;  ///< [layer][direction]
  LstmCellParams decoder;
  Eigen::MatrixXd dense_W;  ///< n_dof x 2 n_H
  Eigen::VectorXd dense_b;
  Normalization norm;

  /// All weights zero, identity normalization.
  static EncDecParams zeros(const ModelDims& dims);
  /// Uniform in +-sqrt(1/H) per tensor, H the owning cell's hidden size.
  static EncDecParams random(const ModelDims& dims, std::uint64_t seed);

  void check() const;

  /// Visits every trainable tensor in a fixed order with a stable name.
  template <class F>
  void for_each_tensor(F&& f) {
    for (std::size_t l = 0; l < encoder.size(); ++l)
      for (int d = 0; d < 2; ++d) {
        const std::string base = "encoder." + std::to_string(l) + (d == kForward ? ".fwd" : ".bwd");
        f(base + ".W_d", encoder[l][static_cast<std::size_t>(d)].Wd);
        f(base + ".W_h", encoder[l][static_cast<std::size_t>(d)].Wh);
        f(base + ".b", encoder[l][static_cast<std::size_t>(d)].b);
      }
    f(std::string("decoder.W_d"), decoder.Wd);
    f(std::string("decoder.W_h"), decoder.Wh);
    f(std::string("decoder.b"), decoder.b);
    f(std::string("dense.W"), dense_W);
    f(std::string("dense.b"), dense_b);
  }
  template <class F>
  void for_each_tensor(F&& f) const {
    const_cast<EncDecParams*>(this)->for_each_tensor([&](const std::string& name, auto& t) { f(name, std::as_const(t)); });
  }

  Eigen::Index n_parameters() const;
  Eigen::VectorXd pack() const;
  void unpack(const Eigen::VectorXd& theta);
};

/// A batch in normalized coordinates: x[t] is n_dof x B for t < n_p, y[t]
/// is n_dof x B for t < n_f, alpha holds one load parameter per sample.
struct SeqBatch {
  std::vector<Eigen::MatrixXd> x;
  std::vector<Eigen::MatrixXd> y;
  Eigen::RowVectorXd alpha;

  Eigen::Index size() const { return x.empty() ? 0 : x.front().cols(); }
};

/// ||Y - Y_hat||_F^2 / (rows * cols).
double mse_loss(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat);

/// Physical-units prediction for X (n_dof x n_p); returns n_dof x n_f.
Eigen::MatrixXd model_forward(const Eigen::MatrixXd& X, const EncDecParams& params,
                              std::optional<double> alpha_f = std::nullopt);

/// Normalized-space predictions for a batch; out[t] is n_dof x B.
std::vector<Eigen::MatrixXd> forward_normalized(const EncDecParams& params, const SeqBatch& batch);

/// Batch loss: sum over samples of mse_loss in normalized space, divided by
/// the batch size. When `grad` is given it receives the exact gradient
/// (backpropagation through time, predictions fed back).
double loss_and_gradient(const EncDecParams& params, const SeqBatch& batch, EncDecParams* grad);

}  // namespace sacfem::nn
