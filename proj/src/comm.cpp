#include "sacfem/comm.hpp"

#include <algorithm>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

#include "sacfem/errors.hpp"

namespace sacfem {

namespace {

double seconds(Clock::time_point a, Clock::time_point b) { return std::chrono::duration<double>(b - a).count(); }

}  // namespace

RankContext make_rank_context(const Mesh& mesh, const Partition& partition, int rank, double latency) {
  if (rank < 0 || rank >= partition.n_ranks) throw std::invalid_argument("make_rank_context: rank out of range");
  const auto r = static_cast<std::size_t>(rank);
  RankContext ctx;
  ctx.rank = rank;
  ctx.latency = latency;
  ctx.elems = partition.elems[r];
  ctx.nodes = partition.local_nodes[r];
  ctx.node_to_local.assign(static_cast<std::size_t>(mesh.n_nodes()), -1);
  for (std::size_t i = 0; i < ctx.nodes.size(); ++i)
    ctx.node_to_local[static_cast<std::size_t>(ctx.nodes[i])] = static_cast<int>(i);
  for (int node : partition.shared_nodes[r]) {
    const int local = ctx.node_to_local[static_cast<std::size_t>(node)];
    for (int i = 0; i < 3; ++i) {
      ctx.shared_global_dofs.push_back(3 * node + i);
      ctx.shared_local_dofs.push_back(3 * local + i);
    }
  }
  for (int node : mesh.dirichlet_nodes) {
    const int local = ctx.node_to_local[static_cast<std::size_t>(node)];
    if (local >= 0)
      for (int i = 0; i < 3; ++i) ctx.dirichlet_local_dofs.push_back(3 * local + i);
  }
  return ctx;
}

std::vector<RankContext> make_rank_contexts(const Mesh& mesh, const Partition& partition, double latency) {
  std::vector<RankContext> out;
  for (int r = 0; r < partition.n_ranks; ++r) out.push_back(make_rank_context(mesh, partition, r, latency));
  return out;
}

SharedReducer::SharedReducer(const std::vector<RankContext>& ranks) {
  std::vector<int> all;
  for (const auto& ctx : ranks) all.insert(all.end(), ctx.shared_global_dofs.begin(), ctx.shared_global_dofs.end());
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  n_shared_ = static_cast<int>(all.size());
  for (const auto& ctx : ranks) {
    std::vector<int> slots;
    slots.reserve(ctx.shared_global_dofs.size());
    for (int g : ctx.shared_global_dofs)
      slots.push_back(static_cast<int>(std::lower_bound(all.begin(), all.end(), g) - all.begin()));
    slot_.push_back(std::move(slots));
  }
}

void SharedReducer::reduce(std::vector<SharedForces>& per_rank) const {
  if (per_rank.size() != slot_.size()) throw std::invalid_argument("SharedReducer: rank count mismatch");
  std::vector<double> f_int(static_cast<std::size_t>(n_shared_), 0.0);
  std::vector<double> f_ext(static_cast<std::size_t>(n_shared_), 0.0);
  for (std::size_t r = 0; r < per_rank.size(); ++r) {
    const auto& slots = slot_[r];
    if (per_rank[r].f_int.size() != slots.size() || per_rank[r].f_ext.size() != slots.size())
      throw std::invalid_argument("SharedReducer: contribution size mismatch for rank " + std::to_string(r));
    for (std::size_t k = 0; k < slots.size(); ++k) {
      f_int[static_cast<std::size_t>(slots[k])] += per_rank[r].f_int[k];
      f_ext[static_cast<std::size_t>(slots[k])] += per_rank[r].f_ext[k];
    }
  }
  for (std::size_t r = 0; r < per_rank.size(); ++r)
    for (std::size_t k = 0; k < slot_[r].size(); ++k) {
      per_rank[r].f_int[k] = f_int[static_cast<std::size_t>(slot_[r][k])];
      per_rank[r].f_ext[k] = f_ext[static_cast<std::size_t>(slot_[r][k])];
    }
}

void reduce_shared_forces(std::vector<SharedForces>& per_rank, const std::vector<RankContext>& ranks) {
  SharedReducer(ranks).reduce(per_rank);
}

void StepBarrier::arrive_and_wait() {
  std::unique_lock lock(mutex_);
  if (abort_->load()) throw RunAborted{};
  const long gen = generation_;
  if (++waiting_ == parties_) {
    waiting_ = 0;
    ++generation_;
    cv_.notify_all();
    return;
  }
  cv_.wait(lock, [&] { return generation_ != gen || abort_->load(); });
  if (generation_ == gen) throw RunAborted{};
}

void StepBarrier::wake_all() {
  std::lock_guard lock(mutex_);
  cv_.notify_all();
}

StarExchange::StarExchange(const std::vector<RankContext>& ranks, double latency, std::chrono::milliseconds timeout)
    : reducer_(ranks),
      n_ranks_(static_cast<int>(ranks.size())),
      latency_(std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::duration<double>(latency))),
      timeout_(timeout),
      barrier_(static_cast<int>(ranks.size()), abort_) {
  for (int r = 0; r < n_ranks_; ++r) boxes_.push_back(std::make_unique<Mailbox>());
}

void StarExchange::abort() {
  abort_.store(true);
  barrier_.wake_all();
  for (auto& box : boxes_) {
    std::lock_guard lock(box->mutex);
    box->cv.notify_all();
  }
}

void StarExchange::post(int to, Message msg) {
  auto& box = *boxes_[static_cast<std::size_t>(to)];
  {
    std::lock_guard lock(box.mutex);
    box.queue.push_back(std::move(msg));
  }
  box.cv.notify_all();
}

StarExchange::Message StarExchange::receive(int at, int expected_from) {
  auto& box = *boxes_[static_cast<std::size_t>(at)];
  std::unique_lock lock(box.mutex);
  const bool ready =
      box.cv.wait_for(lock, timeout_, [&] { return !box.queue.empty() || abort_.load(); });
  if (abort_.load()) throw RunAborted{};
  if (!ready)
    throw CommunicationError(expected_from, "rank " + std::to_string(at) + ": no message from rank " +
                                                (expected_from < 0 ? std::string("(any)")
                                                                   : std::to_string(expected_from)) +
                                                " within timeout");
  Message msg = std::move(box.queue.front());
  box.queue.pop_front();
  lock.unlock();
  if (latency_.count() > 0) std::this_thread::sleep_until(msg.deliver_at);
  return msg;
}

void StarExchange::synchronize(int rank, SharedForces& forces) {
  barrier_.arrive_and_wait();
  post(0, Message{rank, Clock::now() + latency_, std::move(forces)});
  if (rank == 0) {
    std::vector<SharedForces> gathered(static_cast<std::size_t>(n_ranks_));
    std::vector<char> seen(static_cast<std::size_t>(n_ranks_), 0);
    for (int k = 0; k < n_ranks_; ++k) {
      int missing = -1;
      for (int r = 0; r < n_ranks_; ++r)
        if (!seen[static_cast<std::size_t>(r)]) {
          missing = r;
          break;
        }
      Message msg = receive(0, missing);
      seen[static_cast<std::size_t>(msg.from)] = 1;
      gathered[static_cast<std::size_t>(msg.from)] = std::move(msg.payload);
    }
    reducer_.reduce(gathered);
    for (int r = 0; r < n_ranks_; ++r)
      post(r, Message{0, Clock::now() + latency_, std::move(gathered[static_cast<std::size_t>(r)])});
  }
  forces = receive(rank, 0).payload;
}

void run_ranks(int n_ranks, StarExchange& exchange, const std::function<void(int)>& worker) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_ranks));
  {
    std::vector<std::jthread> threads;
    threads.reserve(static_cast<std::size_t>(n_ranks));
    for (int r = 0; r < n_ranks; ++r)
      threads.emplace_back([&, r] {
        try {
          worker(r);
        } catch (const RunAborted&) {
        } catch (...) {
          errors[static_cast<std::size_t>(r)] = std::current_exception();
          exchange.abort();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

RankSolver::RankSolver(const Mesh& mesh, const Material& mat, const LoadSpec& load, const RankContext& ctx,
                       const Eigen::VectorXd& m_global, const Eigen::VectorXd& d0_global,
                       const Eigen::VectorXd& d_minus1_global, double dt, long n_steps, AssemblyMode mode)
    : ctx_(&ctx),
      load_(&load),
      block_(mesh, mat, ctx.elems, ctx.node_to_local, load.body_force, mode == AssemblyMode::PreAssembled),
      dt_(dt) {
  const int n = ctx.n_local_dofs();
  m_.resize(n);
  d_prev_.resize(n);
  d_prev2_.resize(n);
  for (int i = 0; i < n; ++i) {
    const int g = ctx.local_to_global_dof(i);
    m_[i] = m_global[g];
    d_prev_[i] = d0_global[g];
    d_prev2_[i] = d_minus1_global[g];
  }
  c_ = mat.alpha * m_;
  for (int i : ctx.dirichlet_local_dofs) d_prev_[i] = 0.0;
  f_int_.resize(n);
  f_ext_.resize(n);
  d_next_.resize(n);
  shared_.f_int.resize(ctx.shared_local_dofs.size());
  shared_.f_ext.resize(ctx.shared_local_dofs.size());
  history_.resize(n, n_steps + 1);
  history_.col(0) = d_prev_;
}

void RankSolver::compute_forces(StepTiming& timing) {
  const auto t0 = Clock::now();
  block_.form_element_quantities();
  const auto t1 = Clock::now();
  const double t = static_cast<double>(step_ + 1) * dt_;
  block_.internal_force(d_prev_, f_int_);
  block_.external_force(load_->scale(t), f_ext_);
  const auto t2 = Clock::now();
  timing.t_e += seconds(t0, t1);
  timing.t_m += seconds(t1, t2);
}

void RankSolver::advance(StepTiming& timing) {
  const auto t0 = Clock::now();
  central_difference_step(d_prev_, d_prev2_, m_, c_, f_int_, f_ext_, dt_, d_next_);
  for (int i : ctx_->dirichlet_local_dofs) d_next_[i] = 0.0;
  ++step_;
  if (!d_next_.allFinite())
    throw InstabilityError(step_, "rank " + std::to_string(ctx_->rank) + ": non-finite displacement at step " +
                                      std::to_string(step_));
  history_.col(step_) = d_next_;
  d_prev2_.swap(d_prev_);
  d_prev_.swap(d_next_);
  timing.t_m += seconds(t0, Clock::now());
}

void RankSolver::synchronized_step(StarExchange& exchange, StepTiming& timing) {
  const auto start = Clock::now();
  compute_forces(timing);
  const auto s0 = Clock::now();
  const auto& dofs = ctx_->shared_local_dofs;
  shared_.f_int.resize(dofs.size());
  shared_.f_ext.resize(dofs.size());
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    shared_.f_int[k] = f_int_[dofs[k]];
    shared_.f_ext[k] = f_ext_[dofs[k]];
  }
  exchange.synchronize(ctx_->rank, shared_);
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    f_int_[dofs[k]] = shared_.f_int[k];
    f_ext_[dofs[k]] = shared_.f_ext[k];
  }
  timing.t_s += seconds(s0, Clock::now());
  advance(timing);
  timing.t_t += seconds(start, Clock::now());
}

void RankSolver::local_step(StepTiming& timing) {
  const auto start = Clock::now();
  compute_forces(timing);
  advance(timing);
  timing.t_t += seconds(start, Clock::now());
}

void RankSolver::overwrite_shared(const Eigen::VectorXd& values) {
  const auto& dofs = ctx_->shared_local_dofs;
  if (values.size() != static_cast<Eigen::Index>(dofs.size()))
    throw std::invalid_argument("overwrite_shared: size mismatch");
  for (std::size_t k = 0; k < dofs.size(); ++k) d_prev_[dofs[k]] = values[static_cast<Eigen::Index>(k)];
  for (int i : ctx_->dirichlet_local_dofs) d_prev_[i] = 0.0;
  history_.col(step_) = d_prev_;
}

Eigen::MatrixXd RankSolver::shared_history() const {
  const auto& dofs = ctx_->shared_local_dofs;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(dofs.size()), history_.cols());
  for (std::size_t k = 0; k < dofs.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = history_.row(dofs[k]);
  return out;
}

Trajectory gather_trajectory(const Mesh& mesh, const std::vector<RankContext>& ranks,
                             const std::vector<const Eigen::MatrixXd*>& histories, double dt) {
  Trajectory traj;
  traj.dt = dt;
  const Eigen::Index cols = histories.empty() ? 0 : histories.front()->cols();
  traj.d = Eigen::MatrixXd::Zero(mesh.n_dofs(), cols);
  std::vector<char> done(static_cast<std::size_t>(mesh.n_nodes()), 0);
  for (std::size_t r = 0; r < ranks.size(); ++r) {
    const auto& ctx = ranks[r];
    for (std::size_t i = 0; i < ctx.nodes.size(); ++i) {
      const int node = ctx.nodes[i];
      if (done[static_cast<std::size_t>(node)]) continue;
      done[static_cast<std::size_t>(node)] = 1;
      traj.d.middleRows(3 * node, 3) = histories[r]->middleRows(3 * static_cast<Eigen::Index>(i), 3);
    }
  }
  return traj;
}

DistributedResult distributed_solve(const Mesh& mesh, const Partition& partition, const Material& mat,
                                    const LoadSpec& load, double dt, long n_steps,
                                    const DistributedOptions& options) {
  if (!(dt > 0)) throw std::invalid_argument("distributed_solve: dt must be positive");
  if (n_steps < 0) throw std::invalid_argument("distributed_solve: negative step count");
  const auto ranks = make_rank_contexts(mesh, partition, options.latency);
  const Eigen::VectorXd m = assemble_lumped_mass(mesh, element_densities(mesh, mat, options.ic.rho_e));
  Eigen::VectorXd d0 = options.ic.d0.size() ? options.ic.d0 : Eigen::VectorXd::Zero(mesh.n_dofs());
  const Eigen::VectorXd d_minus1 = initial_previous_displacement(mesh, mat, load, dt, options.ic);

  std::vector<std::unique_ptr<RankSolver>> solvers(ranks.size());
  for (std::size_t r = 0; r < ranks.size(); ++r)
    solvers[r] = std::make_unique<RankSolver>(mesh, mat, load, ranks[r], m, d0, d_minus1, dt, n_steps, options.mode);

  DistributedResult result;
  result.timings.assign(ranks.size(), std::vector<StepTiming>(static_cast<std::size_t>(n_steps)));
  StarExchange exchange(ranks, options.latency, options.timeout);
  run_ranks(partition.n_ranks, exchange, [&](int r) {
    auto& solver = *solvers[static_cast<std::size_t>(r)];
    auto& timing = result.timings[static_cast<std::size_t>(r)];
    for (long n = 1; n <= n_steps; ++n) solver.synchronized_step(exchange, timing[static_cast<std::size_t>(n - 1)]);
  });

  std::vector<const Eigen::MatrixXd*> histories;
  for (const auto& s : solvers) {
    histories.push_back(&s->history());
    result.shared_histories.push_back(s->shared_history());
  }
  result.trajectory = gather_trajectory(mesh, ranks, histories, dt);
  return result;
}

}  // namespace sacfem
