#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sacfem/assembly.hpp"
#include "sacfem/integrator.hpp"
#include "sacfem/partition.hpp"

namespace sacfem {

using Clock = std::chrono::steady_clock;

enum class AssemblyMode { PreAssembled, PerStep };

/// Seconds spent by one rank in one step, per phase.
struct StepTiming {
  double t_e = 0.0;  ///< element quantity formation
  double t_s = 0.0;  ///< synchronization, including barrier wait
  double t_m = 0.0;  ///< element products and the lumped update
  double t_d = 0.0;  ///< data-driven model evaluation
  double t_t = 0.0;  ///< wall time of the whole step
};

/// Static description of one rank's piece of the mesh.
struct RankContext {
  int rank = 0;
  std::vector<int> elems;                 ///< owned elements, ascending
  std::vector<int> nodes;                 ///< local -> global node id, ascending
  std::vector<int> node_to_local;         ///< global -> local node id or -1
  std::vector<int> shared_global_dofs;    ///< ascending
  std::vector<int> shared_local_dofs;     ///< same order as shared_global_dofs
  std::vector<int> dirichlet_local_dofs;  ///< ascending
  double latency = 0.0;                   ///< injected delay per message [s]

  int n_local_dofs() const { return 3 * static_cast<int>(nodes.size()); }
  int local_to_global_dof(int local) const { return 3 * nodes[static_cast<std::size_t>(local / 3)] + local % 3; }
};

RankContext make_rank_context(const Mesh& mesh, const Partition& partition, int rank, double latency = 0.0);
std::vector<RankContext> make_rank_contexts(const Mesh& mesh, const Partition& partition, double latency = 0.0);

/// One rank's force contributions at its shared dofs, ordered like
/// RankContext::shared_global_dofs.
struct SharedForces {
  std::vector<double> f_int;
  std::vector<double> f_ext;
};

/// Root-side summation of shared-dof contributions. Every dof is summed
/// starting from zero in ascending rank order, so the result is independent
/// of message arrival order.
class SharedReducer {
 public:
  explicit SharedReducer(const std::vector<RankContext>& ranks);

  /// Overwrites every rank's entries with the global sums.
  void reduce(std::vector<SharedForces>& per_rank) const;

  int n_shared_dofs() const { return n_shared_; }

 private:
  int n_shared_ = 0;
  std::vector<std::vector<int>> slot_;  ///< per rank: position in the global shared table
};

void reduce_shared_forces(std::vector<SharedForces>& per_rank, const std::vector<RankContext>& ranks);

/// Thrown inside workers when another rank failed.
struct RunAborted {};

/// Reusable barrier that can be torn down when a worker fails.
class StepBarrier {
 public:
  StepBarrier(int parties, const std::atomic<bool>& abort) : parties_(parties), abort_(&abort) {}
  void arrive_and_wait();
  void wake_all();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int parties_;
  int waiting_ = 0;
  long generation_ = 0;
  const std::atomic<bool>* abort_;
};

/// Star exchange: every rank sends its shared-dof forces to rank 0, which
/// reduces them and sends the sums back. Messages become visible to the
/// receiver only after the injected latency.
class StarExchange {
 public:
  StarExchange(const std::vector<RankContext>& ranks, double latency, std::chrono::milliseconds timeout);

  /// Runs the three boxed exchange steps for `rank`; `forces` is replaced by
  /// the reduced values.
  void synchronize(int rank, SharedForces& forces);
  /// All ranks meet; used at phase switches.
  void barrier() { barrier_.arrive_and_wait(); }

  void abort();
  const std::atomic<bool>& aborted() const { return abort_; }

 private:
  struct Message {
    int from = 0;
    Clock::time_point deliver_at;
    SharedForces payload;
  };
  struct Mailbox {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<Message> queue;
  };

  void post(int to, Message msg);
  Message receive(int at, int expected_from);

  SharedReducer reducer_;
  int n_ranks_;
  std::chrono::nanoseconds latency_;
  std::chrono::milliseconds timeout_;
  std::atomic<bool> abort_{false};
  StepBarrier barrier_;
  std::vector<std::unique_ptr<Mailbox>> boxes_;
};

/// Launches one thread per rank and rethrows the first worker failure after
/// all threads stopped.
void run_ranks(int n_ranks, StarExchange& exchange, const std::function<void(int)>& worker);

struct DistributedOptions {
  AssemblyMode mode = AssemblyMode::PreAssembled;
  double latency = 0.0;  ///< [s] per message
  std::chrono::milliseconds timeout{60000};
  InitialConditions ic;
};

/// Per-rank state of the explicit recursion on the local dof numbering.
class RankSolver {
 public:
  RankSolver(const Mesh& mesh, const Material& mat, const LoadSpec& load, const RankContext& ctx,
             const Eigen::VectorXd& m_global, const Eigen::VectorXd& d0_global,
             const Eigen::VectorXd& d_minus1_global, double dt, long n_steps, AssemblyMode mode);

  /// Algorithm step with the boxed force exchange.
  void synchronized_step(StarExchange& exchange, StepTiming& timing);
  /// Same update with purely local forces.
  void local_step(StepTiming& timing);
  /// Writes prescribed values into the current displacement and records it.
  void overwrite_shared(const Eigen::VectorXd& values);

  long step() const { return step_; }  ///< index of the last computed displacement
  const RankContext& context() const { return *ctx_; }
  const Eigen::MatrixXd& history() const { return history_; }  ///< local dofs x (n_steps + 1)
  /// Shared-dof rows of the history, ordered like shared_global_dofs.
  Eigen::MatrixXd shared_history() const;

 private:
  void compute_forces(StepTiming& timing);
  void advance(StepTiming& timing);

  const RankContext* ctx_;
  const LoadSpec* load_;
  ElementBlock block_;
  Eigen::VectorXd m_, c_;
  Eigen::VectorXd d_prev_, d_prev2_, d_next_, f_int_, f_ext_;
  SharedForces shared_;
  double dt_;
  long step_ = 0;
  Eigen::MatrixXd history_;
};

struct DistributedResult {
  Trajectory trajectory;                         ///< gathered global history
  std::vector<std::vector<StepTiming>> timings;  ///< [rank][step - 1]
  std::vector<Eigen::MatrixXd> shared_histories; ///< [rank] shared dofs x rows
};

/// Gathers local histories into global columns; shared nodes take the value
/// held by their lowest-numbered rank.
Trajectory gather_trajectory(const Mesh& mesh, const std::vector<RankContext>& ranks,
                             const std::vector<const Eigen::MatrixXd*>& histories, double dt);

/// Rank-parallel explicit solve with a force synchronization every step.
DistributedResult distributed_solve(const Mesh& mesh, const Partition& partition, const Material& mat,
                                    const LoadSpec& load, double dt, long n_steps,
                                    const DistributedOptions& options = {});

}  // namespace sacfem
