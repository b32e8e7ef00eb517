#pragma once

#include <utility>

#include <Eigen/Core>

namespace sacfem::nn {

/// Gate blocks are stacked row-wise in this order.
enum Gate : int { kForget = 0, kInput1 = 1, kInput2 = 2, kOutput = 3 };
inline constexpr int kGates = 4;

/// One LSTM cell. Wd is 4H x n_in, Wh is 4H x H, b has 4H entries; rows
/// [g*H, (g+1)*H) belong to gate g.
struct LstmCellParams {
  Eigen::MatrixXd Wd;
  Eigen::MatrixXd Wh;
  Eigen::VectorXd b;

  int n_in() const { return static_cast<int>(Wd.cols()); }
  int n_hidden() const { return static_cast<int>(Wh.cols()); }

  static LstmCellParams zeros(int n_in, int n_hidden);
  /// Throws std::invalid_argument on inconsistent shapes.
  void check() const;
};

double sigmoid(double x);

/// Single-sample cell update; returns (h', c').
std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const Eigen::VectorXd& d_in, const Eigen::VectorXd& h,
                                                               const Eigen::VectorXd& c, const LstmCellParams& p);

/// Values kept from a batched forward step for the backward pass. Columns are
/// samples.
struct LstmStepCache {
  Eigen::MatrixXd x, h_prev, c_prev;
  Eigen::MatrixXd gates;  ///< activated gates, 4H x B
  Eigen::MatrixXd c;      ///< new cell state
  Eigen::MatrixXd tanh_c;
};

/// Batched forward step; fills `cache` and writes the new states.
void lstm_step_forward(const LstmCellParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& h,
                       const Eigen::MatrixXd& c, LstmStepCache& cache, Eigen::MatrixXd& h_out,
                       Eigen::MatrixXd& c_out);

/// Batched backward step. On entry `dh` and `dc` hold the loss gradient with
/// respect to the step's outputs; on exit they hold the gradient with respect
/// to h_prev and c_prev. Parameter gradients are accumulated into `grad`.
/// `dx` receives the input gradient unless null.
void lstm_step_backward(const LstmCellParams& p, const LstmStepCache& cache, Eigen::MatrixXd& dh,
                        Eigen::MatrixXd& dc, LstmCellParams& grad, Eigen::MatrixXd* dx);

}  // namespace sacfem::nn
