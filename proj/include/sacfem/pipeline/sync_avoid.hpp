#pragma once

#include <vector>

#include "sacfem/comm.hpp"
#include "sacfem/pipeline/evaluate.hpp"

namespace sacfem::pipeline {

struct SyncAvoidConfig {
  int n_s = 80;
  long n_cri = 0;  ///< last synchronized step; 0 means n_p n_s + 1

  long resolved_n_cri(int n_p) const { return n_cri > 0 ? n_cri : static_cast<long>(n_p) * n_s + 1; }
};

struct SyncAvoidResult {
  Trajectory trajectory;                         ///< shared nodes from their lowest rank
  std::vector<std::vector<StepTiming>> timings;  ///< [rank][step - 1]
  std::vector<Eigen::MatrixXd> shared_histories; ///< [rank] shared dofs x rows
  long n_cri = 0;
};

/// Steps 1 .. n_cri exchange forces every step; afterwards each rank advances
/// in blocks of n_s n_f steps with local forces only and overwrites its shared
/// dofs with its model's refill predictions. models[r] serves rank r.
SyncAvoidResult sync_avoiding_solve(const Mesh& mesh, const Partition& partition, const Material& mat,
                                    const LoadSpec& load, double dt, long n_steps,
                                    const std::vector<const SequenceModel*>& models, const SyncAvoidConfig& cfg,
                                    const DistributedOptions& options = {});

}  // namespace sacfem::pipeline
