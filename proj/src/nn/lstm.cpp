#include "sacfem/nn/lstm.hpp"

#include <cmath>
#include <stdexcept>

namespace sacfem::nn {

LstmCellParams LstmCellParams::zeros(int n_in, int n_hidden) {
  LstmCellParams p;
  p.Wd = Eigen::MatrixXd::Zero(kGates * n_hidden, n_in);
  p.Wh = Eigen::MatrixXd::Zero(kGates * n_hidden, n_hidden);
  p.b = Eigen::VectorXd::Zero(kGates * n_hidden);
  return p;
}

void LstmCellParams::check() const {
  const auto H = Wh.cols();
  if (Wh.rows() != kGates * H || Wd.rows() != kGates * H || b.size() != kGates * H)
    throw std::invalid_argument("LstmCellParams: inconsistent gate shapes");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::pair<Eigen::VectorXd, Eigen::VectorXd> lstm_cell_forward(const Eigen::VectorXd& d_in, const Eigen::VectorXd& h,
                                                               const Eigen::VectorXd& c, const LstmCellParams& p) {
  p.check();
  const int H = p.n_hidden();
  if (d_in.size() != p.n_in() || h.size() != H || c.size() != H)
    throw std::invalid_argument("lstm_cell_forward: shape mismatch");
  LstmStepCache cache;
  Eigen::MatrixXd h_out, c_out;
  lstm_step_forward(p, d_in, h, c, cache, h_out, c_out);
  return {h_out.col(0), c_out.col(0)};
}

void lstm_step_forward(const LstmCellParams& p, const Eigen::MatrixXd& x, const Eigen::MatrixXd& h,
                       const Eigen::MatrixXd& c, LstmStepCache& cache, Eigen::MatrixXd& h_out,
                       Eigen::MatrixXd& c_out) {
  const Eigen::Index H = p.Wh.cols();
  cache.x = x;
  cache.h_prev = h;
  cache.c_prev = c;
  cache.gates.noalias() = p.Wd * x;
  cache.gates.noalias() += p.Wh * h;
  cache.gates.colwise() += p.b;
  auto sig = [](double v) { return sigmoid(v); };
  auto th = [](double v) { return std::tanh(v); };
  cache.gates.middleRows(kForget * H, H) = cache.gates.middleRows(kForget * H, H).unaryExpr(sig);
  cache.gates.middleRows(kInput1 * H, H) = cache.gates.middleRows(kInput1 * H, H).unaryExpr(sig);
  cache.gates.middleRows(kInput2 * H, H) = cache.gates.middleRows(kInput2 * H, H).unaryExpr(th);
  cache.gates.middleRows(kOutput * H, H) = cache.gates.middleRows(kOutput * H, H).unaryExpr(sig);
  const auto f = cache.gates.middleRows(kForget * H, H).array();
  const auto i1 = cache.gates.middleRows(kInput1 * H, H).array();
  const auto i2 = cache.gates.middleRows(kInput2 * H, H).array();
  const auto o = cache.gates.middleRows(kOutput * H, H).array();
  cache.c = (c.array() * f + i1 * i2).matrix();
  cache.tanh_c = cache.c.unaryExpr(th);
  c_out = cache.c;
  h_out = (cache.tanh_c.array() * o).matrix();
}

void lstm_step_backward(const LstmCellParams& p, const LstmStepCache& cache, Eigen::MatrixXd& dh,
                        Eigen::MatrixXd& dc, LstmCellParams& grad, Eigen::MatrixXd* dx) {
  const Eigen::Index H = p.Wh.cols();
  const auto f = cache.gates.middleRows(kForget * H, H).array();
  const auto i1 = cache.gates.middleRows(kInput1 * H, H).array();
  const auto i2 = cache.gates.middleRows(kInput2 * H, H).array();
  const auto o = cache.gates.middleRows(kOutput * H, H).array();
  const auto tc = cache.tanh_c.array();

  const Eigen::ArrayXXd dct = dc.array() + dh.array() * o * (1.0 - tc * tc);
  Eigen::MatrixXd dz(kGates * H, dh.cols());
  dz.middleRows(kForget * H, H) = (dct * cache.c_prev.array() * f * (1.0 - f)).matrix();
  dz.middleRows(kInput1 * H, H) = (dct * i2 * i1 * (1.0 - i1)).matrix();
  dz.middleRows(kInput2 * H, H) = (dct * i1 * (1.0 - i2 * i2)).matrix();
  dz.middleRows(kOutput * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();

  grad.Wd.noalias() += dz * cache.x.transpose();
  grad.Wh.noalias() += dz * cache.h_prev.transpose();
  grad.b += dz.rowwise().sum();
  if (dx) dx->noalias() = p.Wd.transpose() * dz;
  dc = (dct * f).matrix();
  dh.noalias() = p.Wh.transpose() * dz;
}

}  // namespace sacfem::nn
