#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sacfem/nn/adam.hpp"
#include "sacfem/nn/encdec.hpp"
#include "sacfem/pipeline/dataset.hpp"

namespace sacfem::pipeline {

struct TrainConfig {
  int n_B = 5;
  double eta0 = 5e-4;
  double gamma = 0.9995;
  double eta_min = 5e-7;
  nn::AdamConfig adam;
  std::uint64_t seed = 1;

  void check() const;
  long epochs() const { return nn::epoch_count(eta0, gamma, eta_min); }
};

struct TrainResult {
  nn::EncDecParams params;
  std::vector<double> loss_history;  ///< mean mini-batch loss per epoch
};

/// Optional progress hook: (epoch, loss).
using EpochCallback = std::function<void(long, double)>;

/// Trains one model on `data` for cfg.epochs() epochs with shuffled
/// mini-batches and the exponential learning-rate schedule. k, n_H and n_rep
/// are taken from `arch`; the remaining dimensions come from the data.
/// Throws TrainingError when the loss stops being finite.
TrainResult train_model(const Dataset& data, const nn::ModelDims& arch, const TrainConfig& cfg,
                        const EpochCallback& on_epoch = {});

/// One independent model per rank, seeded with cfg.seed + rank.
std::vector<TrainResult> train_rank_models(const std::vector<Dataset>& per_rank, const nn::ModelDims& arch,
                                           const TrainConfig& cfg,
                                           const std::function<void(int, long, double)>& on_epoch = {});

}  // namespace sacfem::pipeline
