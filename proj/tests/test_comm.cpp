#include <gtest/gtest.h>

#include <chrono>
#include <numeric>

#include "sacfem/comm.hpp"
#include "sacfem/errors.hpp"
#include "sacfem/stability.hpp"

using namespace sacfem;

namespace {
const Material kMat = Material::make(1e6, 0.3, 1.0, 0.5);
}

TEST(RankContext, LocalNumberingRoundTrips) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 2, 2);
  const Partition p = partition_mesh(mesh, 4);
  for (int r = 0; r < 4; ++r) {
    const auto ctx = make_rank_context(mesh, p, r);
    for (int i = 0; i < ctx.n_local_dofs(); ++i) {
      const int g = ctx.local_to_global_dof(i);
      EXPECT_EQ(3 * ctx.node_to_local[static_cast<std::size_t>(g / 3)] + g % 3, i);
    }
    for (std::size_t k = 0; k < ctx.shared_local_dofs.size(); ++k)
      EXPECT_EQ(ctx.local_to_global_dof(ctx.shared_local_dofs[k]), ctx.shared_global_dofs[k]);
  }
}

TEST(SharedReducer, SumsEqualSerialAssembly) {
  // Per-rank internal forces reduced at shared dofs must equal the global
  // K d restricted to the same dofs.
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 2, 2);
  const Partition p = partition_mesh(mesh, 8);
  const auto ranks = make_rank_contexts(mesh, p);
  const Eigen::VectorXd d = Eigen::VectorXd::Random(mesh.n_dofs());
  const Eigen::VectorXd global = assemble_stiffness(mesh, kMat) * d;
  std::vector<SharedForces> per_rank;
  for (const auto& ctx : ranks) {
    ElementBlock block(mesh, kMat, ctx.elems, ctx.node_to_local, Eigen::Vector3d::Zero(), true);
    Eigen::VectorXd local(ctx.n_local_dofs()), f(ctx.n_local_dofs());
    for (int i = 0; i < ctx.n_local_dofs(); ++i) local[i] = d[ctx.local_to_global_dof(i)];
    block.internal_force(local, f);
    SharedForces s;
    for (int l : ctx.shared_local_dofs) {
      s.f_int.push_back(f[l]);
      s.f_ext.push_back(0.0);
    }
    per_rank.push_back(std::move(s));
  }
  SharedReducer(ranks).reduce(per_rank);
  for (std::size_t r = 0; r < ranks.size(); ++r)
    for (std::size_t k = 0; k < ranks[r].shared_global_dofs.size(); ++k) {
      const double want = global[ranks[r].shared_global_dofs[k]];
      EXPECT_NEAR(per_rank[r].f_int[k], want, 1e-9 * (1.0 + std::abs(want)));
    }
}

TEST(SharedReducer, SizeMismatchRejected) {
  const Mesh mesh = generate_beam_mesh(5, 1, 1, 5, 1, 1);
  const auto ranks = make_rank_contexts(mesh, partition_mesh(mesh, 2));
  std::vector<SharedForces> bad(2);
  EXPECT_THROW(SharedReducer(ranks).reduce(bad), std::invalid_argument);
}

class DistributedSweep : public ::testing::TestWithParam<int> {};

TEST_P(DistributedSweep, MatchesSerial) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 1, 2);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  const Trajectory serial = serial_solve(mesh, kMat, LoadSpec{}, dt, 300);
  const auto res = distributed_solve(mesh, partition_mesh(mesh, GetParam()), kMat, LoadSpec{}, dt, 300);
  ASSERT_EQ(res.trajectory.d.cols(), serial.d.cols());
  for (Eigen::Index s = 1; s < serial.d.cols(); ++s) {
    const double ref = serial.d.col(s).norm();
    EXPECT_LE((res.trajectory.d.col(s) - serial.d.col(s)).norm(), 1e-10 * ref) << "step " << s;
  }
}

INSTANTIATE_TEST_SUITE_P(Ranks, DistributedSweep, ::testing::Values(1, 2, 3, 4, 8));

TEST(Distributed, DeterministicAcrossRuns) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 1, 1);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  const Partition p = partition_mesh(mesh, 4);
  const auto a = distributed_solve(mesh, p, kMat, LoadSpec{}, dt, 200);
  const auto b = distributed_solve(mesh, p, kMat, LoadSpec{}, dt, 200);
  EXPECT_EQ(a.trajectory.d, b.trajectory.d);
}

TEST(Distributed, PerStepAssemblyGivesSameResult) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 1, 1);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  const Partition p = partition_mesh(mesh, 2);
  DistributedOptions nopre;
  nopre.mode = AssemblyMode::PerStep;
  const auto a = distributed_solve(mesh, p, kMat, LoadSpec{}, dt, 100);
  const auto b = distributed_solve(mesh, p, kMat, LoadSpec{}, dt, 100, nopre);
  EXPECT_EQ(a.trajectory.d, b.trajectory.d);
  double t_e = 0.0;
  for (const auto& s : b.timings[0]) t_e += s.t_e;
  EXPECT_GT(t_e, 0.0);
}

TEST(Distributed, LatencyIsPaidEveryStep) {
  const Mesh mesh = generate_beam_mesh(5, 1, 1, 5, 1, 1);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  DistributedOptions opt;
  opt.latency = 1e-3;
  const auto t0 = std::chrono::steady_clock::now();
  const auto res = distributed_solve(mesh, partition_mesh(mesh, 2), kMat, LoadSpec{}, dt, 10, opt);
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // one hop up and one hop down per step
  EXPECT_GE(elapsed, 10 * 2e-3);
  for (const auto& s : res.timings[1]) EXPECT_GE(s.t_s, 2e-3 * 0.99);
}

TEST(RunRanks, FailurePropagatesAndReleasesPeers) {
  const Mesh mesh = generate_beam_mesh(5, 1, 1, 5, 1, 1);
  const auto ranks = make_rank_contexts(mesh, partition_mesh(mesh, 3));
  StarExchange ex(ranks, 0.0, std::chrono::milliseconds(5000));
  EXPECT_THROW(run_ranks(3, ex,
                         [&](int r) {
                           if (r == 2) throw InvalidStateError("boom");
                           for (;;) ex.barrier();
                         }),
               InvalidStateError);
}

TEST(RunRanks, MissingMessageTimesOut) {
  const Mesh mesh = generate_beam_mesh(5, 1, 1, 5, 1, 1);
  const auto ranks = make_rank_contexts(mesh, partition_mesh(mesh, 2));
  StarExchange ex(ranks, 0.0, std::chrono::milliseconds(100));
  // rank 1 reaches the barrier but then leaves without sending
  EXPECT_THROW(run_ranks(2, ex,
                         [&](int r) {
                           if (r == 0) {
                             SharedForces f;
                             f.f_int.assign(ranks[0].shared_global_dofs.size(), 0.0);
                             f.f_ext = f.f_int;
                             ex.synchronize(0, f);
                           } else {
                             ex.barrier();
                           }
                         }),
               CommunicationError);
}
