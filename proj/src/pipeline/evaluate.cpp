#include "sacfem/pipeline/evaluate.hpp"

#include <stdexcept>
#include <string>

namespace sacfem::pipeline {

EncDecModel::EncDecModel(nn::EncDecParams params, std::optional<double> alpha_f)
    : params_(std::move(params)), alpha_f_(alpha_f) {
  params_.check();
  if (params_.dims.conditional != alpha_f_.has_value())
    throw std::invalid_argument(params_.dims.conditional ? "EncDecModel: conditional model needs alpha_f"
                                                         : "EncDecModel: alpha_f given to an unconditional model");
}

Eigen::MatrixXd EncDecModel::predict(const Eigen::MatrixXd& X, long, long) const {
  return nn::model_forward(X, params_, alpha_f_);
}

ReplayModel::ReplayModel(Eigen::MatrixXd history, int n_p, int n_f)
    : history_(std::move(history)), n_p_(n_p), n_f_(n_f) {}

Eigen::MatrixXd ReplayModel::predict(const Eigen::MatrixXd&, long first_step, long stride) const {
  Eigen::MatrixXd out(history_.rows(), n_f_);
  for (int j = 0; j < n_f_; ++j) {
    const long s = first_step + j * stride;
    if (s < 0 || s >= history_.cols()) throw std::out_of_range("ReplayModel: step " + std::to_string(s) + " not recorded");
    out.col(j) = history_.col(s);
  }
  return out;
}

Eigen::MatrixXd sampled_series(const Eigen::MatrixXd& history, int n_s) {
  if (n_s < 1) throw std::invalid_argument("sampled_series: n_s must be >= 1");
  const Eigen::Index m = (history.cols() + n_s - 1) / n_s;
  Eigen::MatrixXd out(history.rows(), m);
  for (Eigen::Index j = 0; j < m; ++j) out.col(j) = history.col(j * n_s);
  return out;
}

double e_mse(const SequenceModel& model, const Eigen::MatrixXd& series, long i, int N) {
  const int n_p = model.n_p(), n_f = model.n_f();
  if (N < 1) throw std::invalid_argument("e_mse: N must be >= 1");
  if (series.rows() != model.n_dof()) throw std::invalid_argument("e_mse: dof count mismatch");
  if (i < n_p) throw std::invalid_argument("e_mse: start index leaves no room for an input window");
  const long end = i + static_cast<long>(N) * n_f;
  if (end > series.cols())
    throw std::invalid_argument("e_mse: horizon ends at sample " + std::to_string(end) + " but series has " +
                                std::to_string(series.cols()));
  Eigen::MatrixXd buf(series.rows(), end);
  buf.leftCols(i) = series.leftCols(i);
  double sum = 0.0;
  for (int a = 0; a < N; ++a) {
    const long at = i + static_cast<long>(a) * n_f;
    const Eigen::MatrixXd Y = model.predict(buf.middleCols(at - n_p, n_p), at, 1);
    buf.middleCols(at, n_f) = Y;
    sum += (Y - series.middleCols(at, n_f)).squaredNorm();
  }
  return sum / (static_cast<double>(N) * n_f * static_cast<double>(series.rows()));
}

std::vector<RefillSet> refill_index_sets(long n, int n_p, int n_f, int n_s) {
  if (n_p < 1 || n_f < 1 || n_s < 1) throw std::invalid_argument("refill_index_sets: sizes must be >= 1");
  std::vector<RefillSet> sets(static_cast<std::size_t>(n_s));
  for (int i = 1; i <= n_s; ++i) {
    auto& s = sets[static_cast<std::size_t>(i - 1)];
    for (long v = i + n - static_cast<long>(n_p) * n_s - 1; v <= i + n - n_s - 1; v += n_s) s.inputs.push_back(v);
    for (long v = i + n - 1; v <= i + n + static_cast<long>(n_f) * n_s - n_s - 1; v += n_s) s.outputs.push_back(v);
  }
  return sets;
}

Eigen::MatrixXd refill_predict(const SequenceModel& model, const Eigen::MatrixXd& history,
                               const std::vector<int>& rows, long n, int n_s) {
  const int n_p = model.n_p(), n_f = model.n_f();
  const long first = n - static_cast<long>(n_p) * n_s;
  if (first < 0 || n > history.cols())
    throw std::invalid_argument("refill_predict: need steps " + std::to_string(first) + " .. " +
                                std::to_string(n - 1) + " in the history");
  const Eigen::Index n_dof = rows.empty() ? history.rows() : static_cast<Eigen::Index>(rows.size());
  if (n_dof != model.n_dof()) throw std::invalid_argument("refill_predict: model dof count mismatch");
  Eigen::MatrixXd out(n_dof, static_cast<Eigen::Index>(n_s) * n_f);
  Eigen::MatrixXd X(n_dof, n_p);
  for (const auto& set : refill_index_sets(n, n_p, n_f, n_s)) {
    for (int t = 0; t < n_p; ++t) {
      const long s = set.inputs[static_cast<std::size_t>(t)];
      if (rows.empty()) X.col(t) = history.col(s);
      else
        for (Eigen::Index r = 0; r < n_dof; ++r) X(r, t) = history(rows[static_cast<std::size_t>(r)], s);
    }
    const Eigen::MatrixXd Y = model.predict(X, set.outputs.front(), n_s);
    for (int t = 0; t < n_f; ++t) out.col(set.outputs[static_cast<std::size_t>(t)] - n) = Y.col(t);
  }
  return out;
}

}  // namespace sacfem::pipeline
