#include "sacfem/pipeline/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "sacfem/errors.hpp"

namespace sacfem::pipeline {

void TrainConfig::check() const {
  if (n_B < 1) throw std::invalid_argument("TrainConfig: n_B must be >= 1");
  if (!(gamma > 0 && gamma < 1)) throw std::invalid_argument("TrainConfig: gamma must lie in (0, 1)");
  if (!(eta_min > 0 && eta_min < eta0)) throw std::invalid_argument("TrainConfig: need 0 < eta_min < eta0");
}

TrainResult train_model(const Dataset& data, const nn::ModelDims& arch, const TrainConfig& cfg,
                        const EpochCallback& on_epoch) {
  cfg.check();
  if (data.windows.empty()) throw std::invalid_argument("train_model: empty dataset");
  nn::ModelDims dims = arch;
  dims.n_dof = data.n_dof;
  dims.n_p = data.n_p;
  dims.n_f = data.n_f;
  dims.conditional = data.conditional;

  TrainResult result;
  result.params = nn::EncDecParams::random(dims, cfg.seed);
  result.params.norm = fit_normalization(data);

  const std::size_t n = data.windows.size();
  const long n_epochs = cfg.epochs();
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  Eigen::VectorXd theta = result.params.pack();
  auto state = nn::AdamState::zeros(theta.size());
  nn::EncDecParams grad;
  std::vector<std::size_t> idx;
  for (long epoch = 0; epoch < n_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double eta = nn::learning_rate(cfg.eta0, cfg.gamma, epoch);
    double total = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(cfg.n_B)) {
      const std::size_t stop = std::min(n, start + static_cast<std::size_t>(cfg.n_B));
      idx.assign(order.begin() + static_cast<std::ptrdiff_t>(start), order.begin() + static_cast<std::ptrdiff_t>(stop));
      const auto batch = make_batch(data, result.params.norm, idx);
      const double loss = nn::loss_and_gradient(result.params, batch, &grad);
      if (!std::isfinite(loss))
        throw TrainingError(static_cast<int>(epoch), "training diverged at epoch " + std::to_string(epoch));
      nn::adam_step(theta, grad.pack(), state, eta, cfg.adam);
      result.params.unpack(theta);
      total += loss;
      ++batches;
    }
    const double mean = total / static_cast<double>(batches);
    result.loss_history.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

std::vector<TrainResult> train_rank_models(const std::vector<Dataset>& per_rank, const nn::ModelDims& arch,
                                           const TrainConfig& cfg,
                                           const std::function<void(int, long, double)>& on_epoch) {
  if (per_rank.empty()) throw std::invalid_argument("train_rank_models: no datasets");
  std::vector<TrainResult> out;
  for (std::size_t r = 0; r < per_rank.size(); ++r) {
    TrainConfig rc = cfg;
    rc.seed = cfg.seed + r;
    EpochCallback cb;
    if (on_epoch) cb = [&, r](long e, double l) { on_epoch(static_cast<int>(r), e, l); };
    out.push_back(train_model(per_rank[r], arch, rc, cb));
  }
  return out;
}

}  // namespace sacfem::pipeline
