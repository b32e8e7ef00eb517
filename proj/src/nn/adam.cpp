#include "sacfem/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace sacfem::nn {

void adam_step(Eigen::VectorXd& theta, const Eigen::VectorXd& grad, AdamState& state, double eta,
               const AdamConfig& cfg) {
  if (grad.size() != theta.size() || state.m.size() != theta.size() || state.v.size() != theta.size())
    throw std::invalid_argument("adam_step: size mismatch");
  ++state.t;
  state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grad;
  state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  theta.array() -= eta * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + cfg.eps);
}

long epoch_count(double eta0, double gamma, double eta_min) {
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("epoch_count: gamma must lie in (0, 1)");
  if (!(eta0 > 0 && eta_min > 0 && eta_min < eta0))
    throw std::invalid_argument("epoch_count: need 0 < eta_min < eta0");
  return static_cast<long>(std::floor(std::log(eta_min / eta0) / std::log(gamma)));
}

double learning_rate(double eta0, double gamma, long epoch) {
  return eta0 * std::pow(gamma, static_cast<double>(epoch));
}

}  // namespace sacfem::nn
