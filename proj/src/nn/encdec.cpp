#include "sacfem/nn/encdec.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

namespace sacfem::nn {

Normalization Normalization::identity(int n) {
  return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n)};
}

Eigen::MatrixXd Normalization::normalize(const Eigen::MatrixXd& x) const {
  return ((x.colwise() - shift).array().colwise() / scale.array()).matrix();
}

Eigen::MatrixXd Normalization::denormalize(const Eigen::MatrixXd& x) const {
  return ((x.array().colwise() * scale.array()).matrix()).colwise() + shift;
}

void ModelDims::check() const {
  if (k < 1 || n_H < 1 || n_p < 1 || n_f < 1 || n_dof < 1 || n_rep < 1)
    throw std::invalid_argument("ModelDims: all sizes must be positive");
}

EncDecParams EncDecParams::zeros(const ModelDims& dims) {
  dims.check();
  EncDecParams p;
  p.dims = dims;
  for (int l = 0; l < dims.k; ++l) {
    const int n_in = l == 0 ? dims.n_dof : 2 * dims.n_H;
    p.encoder.push_back({LstmCellParams::zeros(n_in, dims.n_H), LstmCellParams::zeros(n_in, dims.n_H)});
  }
  p.decoder = LstmCellParams::zeros(dims.decoder_input(), 2 * dims.n_H);
  p.dense_W = Eigen::MatrixXd::Zero(dims.n_dof, 2 * dims.n_H);
  p.dense_b = Eigen::VectorXd::Zero(dims.n_dof);
  p.norm = Normalization::identity(dims.n_dof);
  return p;
}

EncDecParams EncDecParams::random(const ModelDims& dims, std::uint64_t seed) {
  EncDecParams p = zeros(dims);
  std::mt19937_64 rng(seed);
  auto fill = [&](Eigen::Ref<Eigen::MatrixXd> t, int hidden) {
    const double a = std::sqrt(1.0 / hidden);
    std::uniform_real_distribution<double> u(-a, a);
    for (Eigen::Index j = 0; j < t.cols(); ++j)
      for (Eigen::Index i = 0; i < t.rows(); ++i) t(i, j) = u(rng);
  };
  for (auto& layer : p.encoder)
    for (auto& cell : layer) {
      fill(cell.Wd, dims.n_H);
      fill(cell.Wh, dims.n_H);
      fill(cell.b, dims.n_H);
    }
  fill(p.decoder.Wd, 2 * dims.n_H);
  fill(p.decoder.Wh, 2 * dims.n_H);
  fill(p.decoder.b, 2 * dims.n_H);
  fill(p.dense_W, 2 * dims.n_H);
  fill(p.dense_b, 2 * dims.n_H);
  return p;
}

void EncDecParams::check() const {
  dims.check();
  if (static_cast<int>(encoder.size()) != dims.k) throw std::invalid_argument("EncDecParams: encoder depth mismatch");
  for (int l = 0; l < dims.k; ++l)
    for (const auto& cell : encoder[static_cast<std::size_t>(l)]) {
      cell.check();
      if (cell.n_hidden() != dims.n_H || cell.n_in() != (l == 0 ? dims.n_dof : 2 * dims.n_H))
        throw std::invalid_argument("EncDecParams: encoder layer " + std::to_string(l) + " shape mismatch");
    }
  decoder.check();
  if (decoder.n_hidden() != 2 * dims.n_H || decoder.n_in() != dims.decoder_input())
    throw std::invalid_argument("EncDecParams: decoder shape mismatch");
  if (dense_W.rows() != dims.n_dof || dense_W.cols() != 2 * dims.n_H || dense_b.size() != dims.n_dof)
    throw std::invalid_argument("EncDecParams: dense layer shape mismatch");
  if (norm.shift.size() != dims.n_dof || norm.scale.size() != dims.n_dof)
    throw std::invalid_argument("EncDecParams: normalization size mismatch");
  if ((norm.scale.array() <= 0).any()) throw std::invalid_argument("EncDecParams: normalization scale must be > 0");
}

Eigen::Index EncDecParams::n_parameters() const {
  Eigen::Index n = 0;
  for_each_tensor([&](const std::string&, const auto& t) { n += t.size(); });
  return n;
}

Eigen::VectorXd EncDecParams::pack() const {
  Eigen::VectorXd theta(n_parameters());
  Eigen::Index at = 0;
  for_each_tensor([&](const std::string&, const auto& t) {
    theta.segment(at, t.size()) = Eigen::Map<const Eigen::VectorXd>(t.data(), t.size());
    at += t.size();
  });
  return theta;
}

void EncDecParams::unpack(const Eigen::VectorXd& theta) {
  if (theta.size() != n_parameters()) throw std::invalid_argument("EncDecParams::unpack: size mismatch");
  Eigen::Index at = 0;
  for_each_tensor([&](const std::string&, auto& t) {
    Eigen::Map<Eigen::VectorXd>(t.data(), t.size()) = theta.segment(at, t.size());
    at += t.size();
  });
}

double mse_loss(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& Y_hat) {
  if (Y.rows() != Y_hat.rows() || Y.cols() != Y_hat.cols()) throw std::invalid_argument("mse_loss: shape mismatch");
  if (Y.size() == 0) throw std::invalid_argument("mse_loss: empty input");
  return (Y - Y_hat).squaredNorm() / static_cast<double>(Y.size());
}

namespace {

struct Tape {
  // [layer][direction][step]; the backward direction stores steps in processing order
  std::vector<std::array<std::vector<LstmStepCache>, 2>> enc;
  std::vector<LstmStepCache> dec;
  std::vector<Eigen::MatrixXd> dec_h;  ///< decoder hidden output per step
  std::vector<Eigen::MatrixXd> y;      ///< normalized predictions
};

Eigen::MatrixXd decoder_input(const EncDecParams& p, const Eigen::MatrixXd& y, const SeqBatch& batch) {
  if (!p.dims.conditional) return y;
  Eigen::MatrixXd x(p.dims.decoder_input(), y.cols());
  x.topRows(p.dims.n_dof) = y;
  x.bottomRows(p.dims.n_rep) = batch.alpha.replicate(p.dims.n_rep, 1);
  return x;
}

void check_batch(const EncDecParams& p, const SeqBatch& batch, bool need_targets) {
  const auto B = batch.size();
  if (static_cast<int>(batch.x.size()) != p.dims.n_p || B == 0)
    throw std::invalid_argument("model: expected " + std::to_string(p.dims.n_p) + " input steps");
  for (const auto& x : batch.x)
    if (x.rows() != p.dims.n_dof || x.cols() != B) throw std::invalid_argument("model: input shape mismatch");
  if (need_targets) {
    if (static_cast<int>(batch.y.size()) != p.dims.n_f)
      throw std::invalid_argument("model: expected " + std::to_string(p.dims.n_f) + " target steps");
    for (const auto& y : batch.y)
      if (y.rows() != p.dims.n_dof || y.cols() != B) throw std::invalid_argument("model: target shape mismatch");
  }
  if (p.dims.conditional && batch.alpha.size() != B)
    throw std::invalid_argument("model: conditional model needs one alpha_f per sample");
  if (!p.dims.conditional && batch.alpha.size() != 0)
    throw std::invalid_argument("model: alpha_f given to an unconditional model");
}

void run_forward(const EncDecParams& p, const SeqBatch& batch, Tape& tape) {
  const int n_p = p.dims.n_p, H = p.dims.n_H;
  const auto B = batch.size();
  tape.enc.assign(static_cast<std::size_t>(p.dims.k), {});
  std::vector<Eigen::MatrixXd> seq = batch.x;
  Eigen::MatrixXd h_T[2], c_T[2];
  for (int l = 0; l < p.dims.k; ++l) {
    std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(n_p), Eigen::MatrixXd(2 * H, B));
    for (int d = 0; d < 2; ++d) {
      auto& caches = tape.enc[static_cast<std::size_t>(l)][static_cast<std::size_t>(d)];
      caches.resize(static_cast<std::size_t>(n_p));
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(H, B), c = Eigen::MatrixXd::Zero(H, B), h_n, c_n;
      for (int s = 0; s < n_p; ++s) {
        const int t = d == kForward ? s : n_p - 1 - s;
        lstm_step_forward(p.encoder[static_cast<std::size_t>(l)][static_cast<std::size_t>(d)],
                          seq[static_cast<std::size_t>(t)], h, c, caches[static_cast<std::size_t>(s)], h_n, c_n);
        h.swap(h_n);
        c.swap(c_n);
        out[static_cast<std::size_t>(t)].middleRows(d * H, H) = h;
      }
      h_T[d] = h;
      c_T[d] = c;
    }
    seq = std::move(out);
  }
  Eigen::MatrixXd h(2 * H, B), c(2 * H, B), h_n, c_n;
  h << h_T[kForward], h_T[kBackward];
  c << c_T[kForward], c_T[kBackward];

  const int n_f = p.dims.n_f;
  tape.dec.resize(static_cast<std::size_t>(n_f));
  tape.dec_h.resize(static_cast<std::size_t>(n_f));
  tape.y.resize(static_cast<std::size_t>(n_f));
  Eigen::MatrixXd x = decoder_input(p, batch.x.back(), batch);
  for (int j = 0; j < n_f; ++j) {
    lstm_step_forward(p.decoder, x, h, c, tape.dec[static_cast<std::size_t>(j)], h_n, c_n);
    h.swap(h_n);
    c.swap(c_n);
    tape.dec_h[static_cast<std::size_t>(j)] = h;
    Eigen::MatrixXd y = p.dense_W * h;
    y.colwise() += p.dense_b;
    x = decoder_input(p, y, batch);
    tape.y[static_cast<std::size_t>(j)] = std::move(y);
  }
}

}  // namespace

std::vector<Eigen::MatrixXd> forward_normalized(const EncDecParams& params, const SeqBatch& batch) {
  params.check();
  check_batch(params, batch, false);
  Tape tape;
  run_forward(params, batch, tape);
  return std::move(tape.y);
}

Eigen::MatrixXd model_forward(const Eigen::MatrixXd& X, const EncDecParams& params, std::optional<double> alpha_f) {
  params.check();
  if (X.rows() != params.dims.n_dof || X.cols() != params.dims.n_p)
    throw std::invalid_argument("model_forward: expected X of shape " + std::to_string(params.dims.n_dof) + " x " +
                                std::to_string(params.dims.n_p));
  if (alpha_f.has_value() != params.dims.conditional)
    throw std::invalid_argument(params.dims.conditional ? "model_forward: conditional model needs alpha_f"
                                                        : "model_forward: alpha_f given to an unconditional model");
  const Eigen::MatrixXd Xn = params.norm.normalize(X);
  SeqBatch batch;
  for (int t = 0; t < params.dims.n_p; ++t) batch.x.push_back(Xn.col(t));
  if (alpha_f) batch.alpha = Eigen::RowVectorXd::Constant(1, *alpha_f);
  const auto y = forward_normalized(params, batch);
  Eigen::MatrixXd Yn(params.dims.n_dof, params.dims.n_f);
  for (int j = 0; j < params.dims.n_f; ++j) Yn.col(j) = y[static_cast<std::size_t>(j)];
  return params.norm.denormalize(Yn);
}

double loss_and_gradient(const EncDecParams& p, const SeqBatch& batch, EncDecParams* grad) {
  p.check();
  check_batch(p, batch, true);
  Tape tape;
  run_forward(p, batch, tape);

  const int n_p = p.dims.n_p, n_f = p.dims.n_f, n_dof = p.dims.n_dof, H = p.dims.n_H;
  const auto B = batch.size();
  const double denom = static_cast<double>(n_f) * n_dof * static_cast<double>(B);
  double loss = 0.0;
  for (int j = 0; j < n_f; ++j)
    loss += (tape.y[static_cast<std::size_t>(j)] - batch.y[static_cast<std::size_t>(j)]).squaredNorm();
  loss /= denom;
  if (!grad) return loss;

  *grad = EncDecParams::zeros(p.dims);
  grad->norm = p.norm;

  // decoder, newest step first; dy_fb carries the gradient flowing back
  // through the fed-back prediction
  Eigen::MatrixXd dh = Eigen::MatrixXd::Zero(2 * H, B), dc = Eigen::MatrixXd::Zero(2 * H, B);
  Eigen::MatrixXd dy_fb = Eigen::MatrixXd::Zero(n_dof, B), dx;
  for (int j = n_f - 1; j >= 0; --j) {
    const auto sj = static_cast<std::size_t>(j);
    Eigen::MatrixXd dy = (2.0 / denom) * (tape.y[sj] - batch.y[sj]) + dy_fb;
    grad->dense_W.noalias() += dy * tape.dec_h[sj].transpose();
    grad->dense_b += dy.rowwise().sum();
    dh.noalias() += p.dense_W.transpose() * dy;
    lstm_step_backward(p.decoder, tape.dec[sj], dh, dc, grad->decoder, j > 0 ? &dx : nullptr);
    if (j > 0) dy_fb = dx.topRows(n_dof);
  }

  // encoder, top layer first; the top layer receives only terminal-state gradients
  std::vector<Eigen::MatrixXd> dout(static_cast<std::size_t>(n_p), Eigen::MatrixXd::Zero(2 * H, B));
  for (int l = p.dims.k - 1; l >= 0; --l) {
    const auto sl = static_cast<std::size_t>(l);
    const int n_in = l == 0 ? n_dof : 2 * H;
    std::vector<Eigen::MatrixXd> din;
    if (l > 0) din.assign(static_cast<std::size_t>(n_p), Eigen::MatrixXd::Zero(n_in, B));
    for (int d = 0; d < 2; ++d) {
      Eigen::MatrixXd dh_d = Eigen::MatrixXd::Zero(H, B), dc_d = Eigen::MatrixXd::Zero(H, B);
      if (l == p.dims.k - 1) {
        dh_d = dh.middleRows(d * H, H);
        dc_d = dc.middleRows(d * H, H);
      }
      const auto& cell = p.encoder[sl][static_cast<std::size_t>(d)];
      auto& gcell = grad->encoder[sl][static_cast<std::size_t>(d)];
      for (int s = n_p - 1; s >= 0; --s) {
        const int t = d == kForward ? s : n_p - 1 - s;
        dh_d += dout[static_cast<std::size_t>(t)].middleRows(d * H, H);
        lstm_step_backward(cell, tape.enc[sl][static_cast<std::size_t>(d)][static_cast<std::size_t>(s)], dh_d, dc_d,
                           gcell, l > 0 ? &dx : nullptr);
        if (l > 0) din[static_cast<std::size_t>(t)] += dx;
      }
    }
    if (l > 0) dout = std::move(din);
  }
  return loss;
}

}  // namespace sacfem::nn
