#pragma once

#include <Eigen/Core>

namespace sacfem::nn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;

  static AdamState zeros(Eigen::Index n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0}; }
};

/// Bias-corrected Adam update of `theta` in place.
void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, double eta,
               const AdamConfig& cfg = {});

/// floor(log_gamma(eta_min / eta0)); throws on invalid ranges.
long epoch_count(double eta0, double gamma, double eta_min);

/// eta0 * gamma^epoch.
double learning_rate(double eta0, double gamma, long epoch);

}  // namespace sacfem::nn
