#include "sacfem/pipeline/dataset.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sacfem/trajectory_io.hpp"

namespace sacfem::pipeline {

void SampleConfig::check() const {
  if (n_s < 1) throw std::invalid_argument("SampleConfig: n_s must be >= 1");
  if (n_p < 1 || n_f < 1) throw std::invalid_argument("SampleConfig: n_p and n_f must be >= 1");
  if (!(n_ts > 0 && n_ts <= 1)) throw std::invalid_argument("SampleConfig: n_ts must lie in (0, 1]");
}

void Dataset::append(const Dataset& other) {
  if (windows.empty() && n_dof == 0) {
    *this = other;
    return;
  }
  if (other.n_dof != n_dof || other.n_p != n_p || other.n_f != n_f || other.conditional != conditional)
    throw std::invalid_argument("Dataset::append: dimension mismatch");
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
}

std::vector<long> sampled_steps(long n_rows, const SampleConfig& cfg) {
  cfg.check();
  const auto limit = static_cast<long>(std::floor(cfg.n_ts * static_cast<double>(n_rows)));
  std::vector<long> out;
  for (long s = 0; s < limit; s += cfg.n_s) out.push_back(s);
  return out;
}

Dataset build_dataset(const Eigen::MatrixXd& history, const SampleConfig& cfg, std::optional<double> alpha_f) {
  const auto steps = sampled_steps(history.cols(), cfg);
  const long need = cfg.n_p + cfg.n_f;
  if (static_cast<long>(steps.size()) < need) {
    const long min_rows =
        static_cast<long>(std::ceil(static_cast<double>((need - 1) * cfg.n_s + 1) / cfg.n_ts));
    throw std::invalid_argument("build_dataset: trajectory has " + std::to_string(history.cols()) +
                                " rows, need at least " + std::to_string(min_rows));
  }
  Dataset data;
  data.n_dof = static_cast<int>(history.rows());
  data.n_p = cfg.n_p;
  data.n_f = cfg.n_f;
  data.conditional = alpha_f.has_value();
  const long n_windows = static_cast<long>(steps.size()) - need + 1;
  for (long w = 0; w < n_windows; ++w) {
    Window win;
    win.X.resize(data.n_dof, cfg.n_p);
    win.Y.resize(data.n_dof, cfg.n_f);
    for (int t = 0; t < cfg.n_p; ++t) win.X.col(t) = history.col(steps[static_cast<std::size_t>(w + t)]);
    for (int t = 0; t < cfg.n_f; ++t) win.Y.col(t) = history.col(steps[static_cast<std::size_t>(w + cfg.n_p + t)]);
    win.alpha_f = alpha_f;
    data.windows.push_back(std::move(win));
  }
  return data;
}

Dataset build_dataset(const Trajectory& traj, const std::vector<int>& dofs, const SampleConfig& cfg,
                      std::optional<double> alpha_f) {
  Eigen::MatrixXd rows(static_cast<Eigen::Index>(dofs.size()), traj.d.cols());
  for (std::size_t i = 0; i < dofs.size(); ++i) {
    if (dofs[i] < 0 || dofs[i] >= traj.d.rows()) throw std::invalid_argument("build_dataset: dof out of range");
    rows.row(static_cast<Eigen::Index>(i)) = traj.d.row(dofs[i]);
  }
  return build_dataset(rows, cfg, alpha_f);
}

nn::Normalization fit_normalization(const Dataset& data) {
  if (data.windows.empty()) throw std::invalid_argument("fit_normalization: empty dataset");
  const Eigen::Index n = data.n_dof;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(n), sq = Eigen::VectorXd::Zero(n);
  double count = 0;
  for (const auto& w : data.windows) {
    sum += w.X.rowwise().sum() + w.Y.rowwise().sum();
    count += static_cast<double>(w.X.cols() + w.Y.cols());
  }
  const Eigen::VectorXd mean = sum / count;
  for (const auto& w : data.windows) {
    sq += (w.X.colwise() - mean).rowwise().squaredNorm();
    sq += (w.Y.colwise() - mean).rowwise().squaredNorm();
  }
  Eigen::VectorXd std = (sq / count).cwiseSqrt();
  const double floor = 1e-12 * std::max(std.maxCoeff(), mean.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(std[i] > floor) || std[i] == 0.0) std[i] = 1.0;
  return {mean, std};
}

nn::SeqBatch make_batch(const Dataset& data, const nn::Normalization& norm, const std::vector<std::size_t>& idx) {
  nn::SeqBatch batch;
  const auto B = static_cast<Eigen::Index>(idx.size());
  batch.x.assign(static_cast<std::size_t>(data.n_p), Eigen::MatrixXd(data.n_dof, B));
  batch.y.assign(static_cast<std::size_t>(data.n_f), Eigen::MatrixXd(data.n_dof, B));
  if (data.conditional) batch.alpha.resize(B);
  const Eigen::ArrayXd inv = norm.scale.array().inverse();
  for (Eigen::Index b = 0; b < B; ++b) {
    const auto& w = data.windows[idx[static_cast<std::size_t>(b)]];
    for (int t = 0; t < data.n_p; ++t)
      batch.x[static_cast<std::size_t>(t)].col(b) = ((w.X.col(t) - norm.shift).array() * inv).matrix();
    for (int t = 0; t < data.n_f; ++t)
      batch.y[static_cast<std::size_t>(t)].col(b) = ((w.Y.col(t) - norm.shift).array() * inv).matrix();
    if (data.conditional) batch.alpha[b] = w.alpha_f.value_or(0.0);
  }
  return batch;
}

void write_dataset(std::ostream& os, const Dataset& data) {
  using namespace binio;
  put_u64(os, kDatasetMagic);
  put_u64(os, data.windows.size());
  put_u64(os, static_cast<std::uint64_t>(data.n_dof));
  put_u64(os, static_cast<std::uint64_t>(data.n_p));
  put_u64(os, static_cast<std::uint64_t>(data.n_f));
  put_u64(os, data.conditional ? 1 : 0);
  for (const auto& w : data.windows) {
    put_f64s(os, w.X.data(), static_cast<std::size_t>(w.X.size()));
    put_f64s(os, w.Y.data(), static_cast<std::size_t>(w.Y.size()));
    if (data.conditional) put_f64(os, w.alpha_f.value_or(0.0));
  }
}

Dataset read_dataset(std::istream& is) {
  using namespace binio;
  if (get_u64(is) != kDatasetMagic) throw std::invalid_argument("read_dataset: bad magic");
  const auto n = get_u64(is);
  Dataset data;
  data.n_dof = static_cast<int>(get_u64(is));
  data.n_p = static_cast<int>(get_u64(is));
  data.n_f = static_cast<int>(get_u64(is));
  data.conditional = get_u64(is) != 0;
  if (data.n_dof < 1 || data.n_p < 1 || data.n_f < 1) throw std::invalid_argument("read_dataset: bad header");
  data.windows.resize(n);
  for (auto& w : data.windows) {
    w.X.resize(data.n_dof, data.n_p);
    w.Y.resize(data.n_dof, data.n_f);
    get_f64s(is, w.X.data(), static_cast<std::size_t>(w.X.size()));
    get_f64s(is, w.Y.data(), static_cast<std::size_t>(w.Y.size()));
    if (data.conditional) w.alpha_f = get_f64(is);
  }
  return data;
}

void write_dataset_file(const std::string& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write dataset file: " + path);
  write_dataset(out, data);
  if (!out) throw std::runtime_error("failed writing dataset file: " + path);
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  return read_dataset(in);
}

}  // namespace sacfem::pipeline
