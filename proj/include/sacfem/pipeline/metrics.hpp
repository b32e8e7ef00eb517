#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "sacfem/comm.hpp"

namespace sacfem::pipeline {

/// Where each shared node's prediction lives: for node j, the ranks holding it
/// and the row of its x component in that rank's shared history.
struct SharedNodeMap {
  std::vector<int> nodes;                             ///< ascending global ids
  std::vector<std::vector<std::pair<int, int>>> owners;  ///< [node] (rank, row), ascending rank

  int n_a() const { return static_cast<int>(nodes.size()); }
};

SharedNodeMap shared_node_map(const std::vector<RankContext>& ranks);

struct ErrorMetrics {
  long first_step = 0;
  Eigen::VectorXd e_l2;    ///< whole-field l2 error per step
  Eigen::VectorXd es_l2;   ///< shared-node error, lowest-rank prediction
  Eigen::VectorXd es_bar;  ///< shared-node error averaged over owning ranks
  Eigen::VectorXd es_hat;  ///< discrepancy between paired predictions
  Eigen::VectorXd et;      ///< per shared node, time average of the error
  Eigen::VectorXd et_hat;  ///< per shared node, time average of the discrepancy
};

/// Metrics over steps [first, last). `truth` and `pred` are global histories,
/// `shared` holds each rank's shared-dof history.
ErrorMetrics error_metrics(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                           const std::vector<Eigen::MatrixXd>& shared, const SharedNodeMap& map, long first,
                           long last);

/// Pearson correlation; 0 when either series is constant.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// step,e_l2,es_l2,es_hat,es_bar
void write_metrics_csv(std::ostream& out, const ErrorMetrics& m);

/// Perturbed copies (1 + u) d_bar with u ~ U(-0.25, 0.25), one u per copy.
struct IcFamily {
  std::vector<double> u;
  std::vector<Eigen::VectorXd> d0;
};
IcFamily make_ic_family(const Eigen::VectorXd& d_bar, int count, std::uint64_t seed);

/// Load parameters alpha_f ~ U(lo, hi).
std::vector<double> make_load_family(int count, double lo, double hi, std::uint64_t seed);

}  // namespace sacfem::pipeline
