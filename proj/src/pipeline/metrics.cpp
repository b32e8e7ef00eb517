#include "sacfem/pipeline/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <stdexcept>

namespace sacfem::pipeline {

SharedNodeMap shared_node_map(const std::vector<RankContext>& ranks) {
  std::map<int, std::vector<std::pair<int, int>>> owners;
  for (const auto& ctx : ranks)
    for (std::size_t k = 0; k < ctx.shared_global_dofs.size(); k += 3)
      owners[ctx.shared_global_dofs[k] / 3].emplace_back(ctx.rank, static_cast<int>(k));
  SharedNodeMap map;
  for (auto& [node, list] : owners) {
    std::sort(list.begin(), list.end());
    map.nodes.push_back(node);
    map.owners.push_back(std::move(list));
  }
  return map;
}

ErrorMetrics error_metrics(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                           const std::vector<Eigen::MatrixXd>& shared, const SharedNodeMap& map, long first,
                           long last) {
  if (truth.rows() != pred.rows()) throw std::invalid_argument("error_metrics: dof count mismatch");
  if (first < 0 || last <= first || last > truth.cols() || last > pred.cols())
    throw std::invalid_argument("error_metrics: misaligned step range");
  for (const auto& h : shared)
    if (last > h.cols()) throw std::invalid_argument("error_metrics: shared history too short");
  const long n_t = last - first;
  const int n_a = map.n_a();
  ErrorMetrics m;
  m.first_step = first;
  m.e_l2.resize(n_t);
  m.es_l2 = Eigen::VectorXd::Zero(n_t);
  m.es_bar = Eigen::VectorXd::Zero(n_t);
  m.es_hat = Eigen::VectorXd::Zero(n_t);
  m.et = Eigen::VectorXd::Zero(n_a);
  m.et_hat = Eigen::VectorXd::Zero(n_a);
  auto node_of = [&](int r, int row, long s) -> Eigen::Vector3d {
    return shared[static_cast<std::size_t>(r)].block(row, s, 3, 1);
  };
  for (long t = 0; t < n_t; ++t) {
    const long s = first + t;
    m.e_l2[t] = (truth.col(s) - pred.col(s)).norm();
    for (int j = 0; j < n_a; ++j) {
      const int node = map.nodes[static_cast<std::size_t>(j)];
      const Eigen::Vector3d d = truth.block(3 * node, s, 3, 1);
      const auto& owners = map.owners[static_cast<std::size_t>(j)];
      const double err = (node_of(owners[0].first, owners[0].second, s) - d).norm();
      double err_mean = 0.0;
      for (const auto& [r, row] : owners) err_mean += (node_of(r, row, s) - d).norm();
      err_mean /= static_cast<double>(owners.size());
      double disc = 0.0;
      int pairs = 0;
      for (std::size_t a = 0; a < owners.size(); ++a)
        for (std::size_t b = a + 1; b < owners.size(); ++b, ++pairs)
          disc += (node_of(owners[a].first, owners[a].second, s) - node_of(owners[b].first, owners[b].second, s)).norm();
      if (pairs) disc /= pairs;
      m.es_l2[t] += err;
      m.es_bar[t] += err_mean;
      m.es_hat[t] += disc;
      m.et[j] += err;
      m.et_hat[j] += disc;
    }
  }
  if (n_a > 0) {
    m.es_l2 /= 3.0 * n_a;
    m.es_bar /= 3.0 * n_a;
    m.es_hat /= 3.0 * n_a;
  }
  m.et /= 3.0 * static_cast<double>(n_t);
  m.et_hat /= 3.0 * static_cast<double>(n_t);
  return m;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0) throw std::invalid_argument("correlation: size mismatch");
  const Eigen::ArrayXd x = a.array() - a.mean(), y = b.array() - b.mean();
  const double den = std::sqrt((x * x).sum() * (y * y).sum());
  return den > 0 ? (x * y).sum() / den : 0.0;
}

void write_metrics_csv(std::ostream& out, const ErrorMetrics& m) {
  out << "step,e_l2,es_l2,es_hat,es_bar\n" << std::setprecision(12);
  for (Eigen::Index t = 0; t < m.e_l2.size(); ++t)
    out << m.first_step + t << ',' << m.e_l2[t] << ',' << m.es_l2[t] << ',' << m.es_hat[t] << ',' << m.es_bar[t]
        << '\n';
}

}  // namespace sacfem::pipeline
