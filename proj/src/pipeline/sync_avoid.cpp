#include "sacfem/pipeline/sync_avoid.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>
#include <string>

namespace sacfem::pipeline {

SyncAvoidResult sync_avoiding_solve(const Mesh& mesh, const Partition& partition, const Material& mat,
                                    const LoadSpec& load, double dt, long n_steps,
                                    const std::vector<const SequenceModel*>& models, const SyncAvoidConfig& cfg,
                                    const DistributedOptions& options) {
  if (!(dt > 0)) throw std::invalid_argument("sync_avoiding_solve: dt must be positive");
  if (cfg.n_s < 1) throw std::invalid_argument("sync_avoiding_solve: n_s must be >= 1");
  if (static_cast<int>(models.size()) != partition.n_ranks)
    throw std::invalid_argument("sync_avoiding_solve: need one model per rank");
  const auto ranks = make_rank_contexts(mesh, partition, options.latency);
  const int n_p = models.front() ? models.front()->n_p() : 0;
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    const auto* m = models[r];
    if (!m) throw std::invalid_argument("sync_avoiding_solve: missing model for rank " + std::to_string(r));
    if (m->n_dof() != static_cast<int>(ranks[r].shared_global_dofs.size()))
      throw std::invalid_argument("sync_avoiding_solve: model for rank " + std::to_string(r) + " expects " +
                                  std::to_string(m->n_dof()) + " dofs, rank has " +
                                  std::to_string(ranks[r].shared_global_dofs.size()));
    if (m->n_p() != n_p || m->n_f() != models.front()->n_f())
      throw std::invalid_argument("sync_avoiding_solve: all rank models must share n_p and n_f");
  }
  const long n_cri = cfg.resolved_n_cri(n_p);
  if (n_cri < static_cast<long>(n_p) * cfg.n_s + 1)
    throw std::invalid_argument("sync_avoiding_solve: n_cri must be >= n_p*n_s+1 = " +
                                std::to_string(static_cast<long>(n_p) * cfg.n_s + 1));
  const long block = static_cast<long>(cfg.n_s) * models.front()->n_f();

  const Eigen::VectorXd m = assemble_lumped_mass(mesh, element_densities(mesh, mat, options.ic.rho_e));
  const Eigen::VectorXd d0 = options.ic.d0.size() ? options.ic.d0 : Eigen::VectorXd::Zero(mesh.n_dofs());
  const Eigen::VectorXd d_minus1 = initial_previous_displacement(mesh, mat, load, dt, options.ic);
  std::vector<std::unique_ptr<RankSolver>> solvers(ranks.size());
  for (std::size_t r = 0; r < ranks.size(); ++r)
    solvers[r] = std::make_unique<RankSolver>(mesh, mat, load, ranks[r], m, d0, d_minus1, dt, n_steps, options.mode);

  SyncAvoidResult result;
  result.n_cri = n_cri;
  result.timings.assign(ranks.size(), std::vector<StepTiming>(static_cast<std::size_t>(n_steps)));
  StarExchange exchange(ranks, options.latency, options.timeout);
  run_ranks(partition.n_ranks, exchange, [&](int r) {
    auto& solver = *solvers[static_cast<std::size_t>(r)];
    auto& timing = result.timings[static_cast<std::size_t>(r)];
    const auto& model = *models[static_cast<std::size_t>(r)];
    const auto& rows = ranks[static_cast<std::size_t>(r)].shared_local_dofs;
    const long sync_end = std::min(n_cri, n_steps);
    for (long n = 1; n <= sync_end; ++n) solver.synchronized_step(exchange, timing[static_cast<std::size_t>(n - 1)]);
    exchange.barrier();
    for (long n = sync_end + 1; n <= n_steps; n += block) {
      auto& first = timing[static_cast<std::size_t>(n - 1)];
      const auto t0 = Clock::now();
      const Eigen::MatrixXd pred = refill_predict(model, solver.history(), rows, n, cfg.n_s);
      const double t_d = std::chrono::duration<double>(Clock::now() - t0).count();
      first.t_d += t_d;
      first.t_t += t_d;
      const long stop = std::min(n_steps, n + block - 1);
      for (long s = n; s <= stop; ++s) {
        auto& t = timing[static_cast<std::size_t>(s - 1)];
        solver.local_step(t);
        const auto o0 = Clock::now();
        solver.overwrite_shared(pred.col(s - n));
        const double dt_o = std::chrono::duration<double>(Clock::now() - o0).count();
        t.t_m += dt_o;
        t.t_t += dt_o;
      }
    }
  });

  std::vector<const Eigen::MatrixXd*> histories;
  for (const auto& s : solvers) {
    histories.push_back(&s->history());
    result.shared_histories.push_back(s->shared_history());
  }
  result.trajectory = gather_trajectory(mesh, ranks, histories, dt);
  return result;
}

}  // namespace sacfem::pipeline
