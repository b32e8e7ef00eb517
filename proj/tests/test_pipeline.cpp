#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "sacfem/pipeline/dataset.hpp"
#include "sacfem/pipeline/evaluate.hpp"
#include "sacfem/pipeline/metrics.hpp"
#include "sacfem/pipeline/sync_avoid.hpp"
#include "sacfem/pipeline/train.hpp"
#include "sacfem/stability.hpp"

using namespace sacfem;
using namespace sacfem::pipeline;

namespace {

const Material kMat = Material::make(1e6, 0.3, 1.0, 0.5);

nn::EncDecParams tiny_model(int n_dof, int n_p, int n_f, std::uint64_t seed) {
  nn::ModelDims d;
  d.k = 1;
  d.n_H = 3;
  d.n_p = n_p;
  d.n_f = n_f;
  d.n_dof = n_dof;
  return nn::EncDecParams::random(d, seed);
}

}  // namespace

TEST(Sampling, StepIndices) {
  SampleConfig cfg{2, 1, 1, 1.0};
  EXPECT_EQ(sampled_steps(10, cfg), (std::vector<long>{0, 2, 4, 6, 8}));
  cfg.n_ts = 0.5;
  EXPECT_EQ(sampled_steps(10, cfg), (std::vector<long>{0, 2, 4}));
}

TEST(Sampling, WindowCountAndContent) {
  Eigen::MatrixXd h(2, 40);
  for (int j = 0; j < 40; ++j) h.col(j) << j, -j;
  const SampleConfig cfg{3, 2, 3, 1.0};
  const auto data = build_dataset(h, cfg);
  const long m = static_cast<long>(sampled_steps(40, cfg).size());
  ASSERT_EQ(static_cast<long>(data.windows.size()), m - 2 - 3 + 1);
  const auto& w = data.windows[4];
  EXPECT_EQ(w.X(0, 0), 12.0);
  EXPECT_EQ(w.X(1, 1), -15.0);
  EXPECT_EQ(w.Y(0, 2), 24.0);
  EXPECT_FALSE(data.conditional);
}

TEST(Sampling, TooShortNamesMinimum) {
  const SampleConfig cfg{4, 3, 3, 0.5};
  try {
    build_dataset(Eigen::MatrixXd::Zero(1, 20), cfg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("need at least"), std::string::npos);
  }
}

TEST(Sampling, TrajectoryRestrictsToDofs) {
  Trajectory t;
  t.d = Eigen::MatrixXd::Random(5, 30);
  const auto data = build_dataset(t, {3, 1}, SampleConfig{1, 2, 2, 1.0}, 0.4);
  EXPECT_EQ(data.n_dof, 2);
  EXPECT_EQ(data.windows[0].X(0, 1), t.d(3, 1));
  EXPECT_EQ(data.windows[0].Y(1, 0), t.d(1, 2));
  EXPECT_TRUE(data.conditional);
  EXPECT_EQ(*data.windows[0].alpha_f, 0.4);
}

TEST(Dataset, BinaryRoundTrip) {
  Dataset d;
  d.n_dof = 2;
  d.n_p = 3;
  d.n_f = 2;
  d.conditional = true;
  for (int k = 0; k < 4; ++k) d.windows.push_back({Eigen::MatrixXd::Random(2, 3), Eigen::MatrixXd::Random(2, 2), 0.1 * k});
  std::stringstream ss;
  write_dataset(ss, d);
  const auto back = read_dataset(ss);
  ASSERT_EQ(back.windows.size(), 4u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(back.windows[k].X, d.windows[k].X);
    EXPECT_EQ(back.windows[k].Y, d.windows[k].Y);
    EXPECT_EQ(back.windows[k].alpha_f, d.windows[k].alpha_f);
  }
  std::stringstream bad("garbage");
  EXPECT_ANY_THROW(read_dataset(bad));
}

TEST(Refill, DocumentedExample) {
  const auto sets = refill_index_sets(100, 2, 2, 3);
  ASSERT_EQ(sets.size(), 3u);
  EXPECT_EQ(sets[0].inputs, (std::vector<long>{94, 97}));
  EXPECT_EQ(sets[0].outputs, (std::vector<long>{100, 103}));
  EXPECT_EQ(sets[1].inputs, (std::vector<long>{95, 98}));
  EXPECT_EQ(sets[1].outputs, (std::vector<long>{101, 104}));
  EXPECT_EQ(sets[2].inputs, (std::vector<long>{96, 99}));
  EXPECT_EQ(sets[2].outputs, (std::vector<long>{102, 105}));
}

TEST(Refill, SingleStrideIsOneApplication) {
  const auto sets = refill_index_sets(50, 3, 4, 1);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].inputs, (std::vector<long>{47, 48, 49}));
  EXPECT_EQ(sets[0].outputs, (std::vector<long>{50, 51, 52, 53}));
}

TEST(Refill, OutputsPartitionBlockExhaustive) {
  for (int n_p = 1; n_p <= 6; ++n_p)
    for (int n_f = 1; n_f <= 6; ++n_f)
      for (int n_s = 1; n_s <= 6; ++n_s)
        for (long n : {static_cast<long>(n_p) * n_s + 1, 77L, 1000L}) {
          if (n < static_cast<long>(n_p) * n_s) continue;
          std::multiset<long> out;
          for (const auto& s : refill_index_sets(n, n_p, n_f, n_s)) {
            ASSERT_EQ(static_cast<int>(s.inputs.size()), n_p);
            ASSERT_EQ(static_cast<int>(s.outputs.size()), n_f);
            for (long v : s.inputs) ASSERT_TRUE(v >= n - static_cast<long>(n_p) * n_s && v < n);
            out.insert(s.outputs.begin(), s.outputs.end());
          }
          const long len = static_cast<long>(n_s) * n_f;
          ASSERT_EQ(static_cast<long>(out.size()), len);
          long expect = n;
          for (long v : out) ASSERT_EQ(v, expect++);
        }
}

TEST(Refill, ReplayFillsEveryStep) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Random(3, 200);
  ReplayModel replay(h, 4, 3);
  const Eigen::MatrixXd pred = refill_predict(replay, h, {}, 120, 5);
  EXPECT_EQ(pred, h.middleCols(120, 15));
  EXPECT_THROW(refill_predict(replay, h, {}, 10, 5), std::invalid_argument);
}

TEST(Emse, SingleApplicationIsMse) {
  const auto p = tiny_model(2, 3, 2, 4);
  const EncDecModel model(p);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Random(2, 12);
  const Eigen::MatrixXd Y = nn::model_forward(s.middleCols(2, 3), p);
  EXPECT_NEAR(e_mse(model, s, 5, 1), nn::mse_loss(s.middleCols(5, 2), Y), 1e-15);
}

TEST(Emse, PerfectOracleIsZero) {
  const Eigen::MatrixXd s = Eigen::MatrixXd::Random(2, 40);
  ReplayModel oracle(s, 3, 4);
  EXPECT_EQ(e_mse(oracle, s, 3, 9), 0.0);
  EXPECT_THROW(e_mse(oracle, s, 3, 10), std::invalid_argument);
  EXPECT_THROW(e_mse(oracle, s, 2, 1), std::invalid_argument);
}

TEST(Emse, ThreeFoldUnroll) {
  const auto p = tiny_model(2, 3, 2, 8);
  const EncDecModel model(p);
  const Eigen::MatrixXd s = Eigen::MatrixXd::Random(2, 20);
  // window a reads the latest three entries of the partially predicted series
  const Eigen::MatrixXd y1 = nn::model_forward(s.middleCols(1, 3), p);
  Eigen::MatrixXd x2(2, 3);
  x2 << s.col(3), y1;
  const Eigen::MatrixXd y2 = nn::model_forward(x2, p);
  Eigen::MatrixXd x3(2, 3);
  x3 << y1.col(1), y2;
  const Eigen::MatrixXd y3 = nn::model_forward(x3, p);
  const double want = ((y1 - s.middleCols(4, 2)).squaredNorm() + (y2 - s.middleCols(6, 2)).squaredNorm() +
                       (y3 - s.middleCols(8, 2)).squaredNorm()) /
                      12.0;
  EXPECT_NEAR(e_mse(model, s, 4, 3), want, 1e-13);
}

TEST(Training, ConstantSeriesLearnedExactly) {
  Eigen::MatrixXd h(3, 60);
  for (int j = 0; j < 60; ++j) h.col(j) << 0.2, -1.5, 3.0;
  const auto data = build_dataset(h, SampleConfig{1, 3, 2, 1.0});
  nn::ModelDims arch;
  arch.k = 1;
  arch.n_H = 4;
  TrainConfig cfg;
  cfg.n_B = 8;
  cfg.eta0 = 1e-2;
  cfg.gamma = 0.99;
  cfg.eta_min = 1e-3;
  const auto res = train_model(data, arch, cfg);
  EXPECT_LE(res.loss_history.back(), 1e-10);
  const Eigen::MatrixXd y = nn::model_forward(h.leftCols(3), res.params);
  EXPECT_LE((y.colwise() - h.col(0)).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Training, SeedDeterminesResult) {
  Eigen::MatrixXd h(2, 50);
  for (int j = 0; j < 50; ++j) h.col(j) << std::sin(0.3 * j), std::cos(0.2 * j);
  const auto data = build_dataset(h, SampleConfig{1, 3, 2, 1.0});
  nn::ModelDims arch;
  arch.k = 1;
  arch.n_H = 3;
  TrainConfig cfg;
  cfg.n_B = 4;
  cfg.eta0 = 1e-2;
  cfg.gamma = 0.9;
  cfg.eta_min = 3e-3;
  const auto a = train_model(data, arch, cfg), b = train_model(data, arch, cfg);
  EXPECT_EQ(a.params.pack(), b.params.pack());
  cfg.seed = 2;
  EXPECT_NE(train_model(data, arch, cfg).params.pack(), a.params.pack());
}

TEST(SyncAvoid, ReplayOracleReproducesSynchronizedRun) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 1, 1);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  const long n_T = 400;
  const Partition part = partition_mesh(mesh, 2);
  // the last refill block reaches past n_T, so record one block further
  const auto ref = distributed_solve(mesh, part, kMat, LoadSpec{}, dt, n_T + 10);
  std::vector<ReplayModel> replay;
  for (const auto& h : ref.shared_histories) replay.emplace_back(h, 3, 2);
  std::vector<const SequenceModel*> models{&replay[0], &replay[1]};
  const auto res = sync_avoiding_solve(mesh, part, kMat, LoadSpec{}, dt, n_T, models, SyncAvoidConfig{5, 0});
  EXPECT_EQ(res.n_cri, 16);
  for (Eigen::Index s = 1; s <= n_T; ++s)
    EXPECT_LE((res.trajectory.d.col(s) - ref.trajectory.d.col(s)).norm(), 1e-10 * ref.trajectory.d.col(s).norm());
  for (int node : mesh.dirichlet_nodes)
    EXPECT_EQ(res.trajectory.d.middleRows(3 * node, 3).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SyncAvoid, SwitchAtEndEqualsDistributed) {
  const Mesh mesh = generate_beam_mesh(25, 1, 1, 25, 1, 1);
  const double dt = cfl_time_step(mesh, kMat, 0.9);
  const Partition part = partition_mesh(mesh, 2);
  const auto ref = distributed_solve(mesh, part, kMat, LoadSpec{}, dt, 200);
  const auto p0 = tiny_model(static_cast<int>(ref.shared_histories[0].rows()), 2, 2, 1);
  const auto p1 = tiny_model(static_cast<int>(ref.shared_histories[1].rows()), 2, 2, 2);
  const EncDecModel m0(p0), m1(p1);
  const auto res = sync_avoiding_solve(mesh, part, kMat, LoadSpec{}, dt, 200, {&m0, &m1}, SyncAvoidConfig{5, 200});
  EXPECT_EQ(res.trajectory.d, ref.trajectory.d);
  EXPECT_THROW(sync_avoiding_solve(mesh, part, kMat, LoadSpec{}, dt, 200, {&m0, &m1}, SyncAvoidConfig{5, 10}),
               std::invalid_argument);
  const EncDecModel wrong(tiny_model(5, 2, 2, 3));
  EXPECT_THROW(sync_avoiding_solve(mesh, part, kMat, LoadSpec{}, dt, 200, {&m0, &wrong}, SyncAvoidConfig{5, 0}),
               std::invalid_argument);
}

namespace {

struct NaiveMetrics {
  std::vector<double> e, es, bar, hat, et, et_hat;
};

NaiveMetrics naive_metrics(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& pred,
                           const std::vector<Eigen::MatrixXd>& shared, const SharedNodeMap& map, long first,
                           long last) {
  NaiveMetrics o;
  const int n_a = map.n_a();
  o.et.assign(static_cast<std::size_t>(n_a), 0.0);
  o.et_hat.assign(static_cast<std::size_t>(n_a), 0.0);
  auto dist = [](const double* a, const double* b) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += (a[c] - b[c]) * (a[c] - b[c]);
    return std::sqrt(s);
  };
  for (long s = first; s < last; ++s) {
    double e = 0;
    for (Eigen::Index i = 0; i < truth.rows(); ++i) e += std::pow(truth(i, s) - pred(i, s), 2);
    o.e.push_back(std::sqrt(e));
    double es = 0, bar = 0, hat = 0;
    for (int j = 0; j < n_a; ++j) {
      const double* t = &truth(3 * map.nodes[static_cast<std::size_t>(j)], s);
      const auto& ow = map.owners[static_cast<std::size_t>(j)];
      std::vector<const double*> p;
      for (const auto& [r, row] : ow) p.push_back(&shared[static_cast<std::size_t>(r)](row, s));
      const double e0 = dist(p[0], t);
      double b = 0;
      for (auto* q : p) b += dist(q, t);
      b /= static_cast<double>(p.size());
      double h = 0;
      int k = 0;
      for (std::size_t a = 0; a < p.size(); ++a)
        for (std::size_t c = a + 1; c < p.size(); ++c, ++k) h += dist(p[a], p[c]);
      if (k) h /= k;
      es += e0;
      bar += b;
      hat += h;
      o.et[static_cast<std::size_t>(j)] += e0 / (3.0 * static_cast<double>(last - first));
      o.et_hat[static_cast<std::size_t>(j)] += h / (3.0 * static_cast<double>(last - first));
    }
    o.es.push_back(es / (3.0 * n_a));
    o.bar.push_back(bar / (3.0 * n_a));
    o.hat.push_back(hat / (3.0 * n_a));
  }
  return o;
}

}  // namespace

TEST(Metrics, IdenticalIsZero) {
  const Mesh mesh = generate_beam_mesh(6, 1, 1, 6, 1, 1);
  const auto ranks = make_rank_contexts(mesh, partition_mesh(mesh, 2));
  const auto map = shared_node_map(ranks);
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Random(mesh.n_dofs(), 5);
  std::vector<Eigen::MatrixXd> shared;
  for (const auto& ctx : ranks) {
    Eigen::MatrixXd h(static_cast<Eigen::Index>(ctx.shared_global_dofs.size()), 5);
    for (std::size_t k = 0; k < ctx.shared_global_dofs.size(); ++k) h.row(static_cast<Eigen::Index>(k)) = truth.row(ctx.shared_global_dofs[k]);
    shared.push_back(h);
  }
  const auto m = error_metrics(truth, truth, shared, map, 0, 5);
  EXPECT_EQ(m.e_l2.norm() + m.es_l2.norm() + m.es_bar.norm() + m.es_hat.norm() + m.et.norm() + m.et_hat.norm(), 0.0);
  EXPECT_THROW(error_metrics(truth, truth, shared, map, 3, 6), std::invalid_argument);
}

TEST(Metrics, SingleOffsetNode) {
  SharedNodeMap map;
  map.nodes = {1};
  map.owners = {{{0, 0}}};
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(6, 2);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 2);
  h(0, 1) = 3.0;
  const auto m = error_metrics(truth, truth, {h}, map, 0, 2);
  EXPECT_EQ(m.es_l2[0], 0.0);
  EXPECT_EQ(m.es_l2[1], 1.0);
}

TEST(Metrics, MatchesNaiveOracle) {
  const Mesh mesh = generate_beam_mesh(12, 1, 1, 12, 1, 1);
  const auto ranks = make_rank_contexts(mesh, partition_mesh(mesh, 4));
  const auto map = shared_node_map(ranks);
  ASSERT_GT(map.n_a(), 0);
  const Eigen::MatrixXd truth = Eigen::MatrixXd::Random(mesh.n_dofs(), 9);
  const Eigen::MatrixXd pred = Eigen::MatrixXd::Random(mesh.n_dofs(), 9);
  std::vector<Eigen::MatrixXd> shared;
  for (const auto& ctx : ranks) shared.push_back(Eigen::MatrixXd::Random(static_cast<Eigen::Index>(ctx.shared_global_dofs.size()), 9));
  const auto m = error_metrics(truth, pred, shared, map, 2, 9);
  const auto o = naive_metrics(truth, pred, shared, map, 2, 9);
  for (int t = 0; t < 7; ++t) {
    EXPECT_NEAR(m.e_l2[t], o.e[static_cast<std::size_t>(t)], 1e-14);
    EXPECT_NEAR(m.es_l2[t], o.es[static_cast<std::size_t>(t)], 1e-14);
    EXPECT_NEAR(m.es_bar[t], o.bar[static_cast<std::size_t>(t)], 1e-14);
    EXPECT_NEAR(m.es_hat[t], o.hat[static_cast<std::size_t>(t)], 1e-14);
  }
  for (int j = 0; j < map.n_a(); ++j) {
    EXPECT_NEAR(m.et[j], o.et[static_cast<std::size_t>(j)], 1e-14);
    EXPECT_NEAR(m.et_hat[j], o.et_hat[static_cast<std::size_t>(j)], 1e-14);
  }
  std::ostringstream csv;
  write_metrics_csv(csv, m);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "step,e_l2,es_l2,es_hat,es_bar");
}

TEST(Metrics, Correlation) {
  Eigen::VectorXd a(4), b(4);
  a << 1, 2, 3, 4;
  b << 2, 4, 6, 8;
  EXPECT_NEAR(correlation(a, b), 1.0, 1e-15);
  EXPECT_NEAR(correlation(a, -b), -1.0, 1e-15);
  EXPECT_EQ(correlation(a, Eigen::VectorXd::Ones(4)), 0.0);
}

TEST(Families, IcBoundsAndReproducibility) {
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  const auto f = make_ic_family(d, 20, 7);
  ASSERT_EQ(f.d0.size(), 20u);
  for (std::size_t k = 0; k < 20; ++k) {
    EXPECT_GE(f.u[k], -0.25);
    EXPECT_LT(f.u[k], 0.25);
    EXPECT_LE((f.d0[k] - (1 + f.u[k]) * d).cwiseAbs().maxCoeff(), 1e-15);
    for (Eigen::Index i = 0; i < d.size(); ++i) {
      EXPECT_GE(std::abs(f.d0[k][i]), 0.75 * std::abs(d[i]) - 1e-15);
      EXPECT_LE(std::abs(f.d0[k][i]), 1.25 * std::abs(d[i]) + 1e-15);
    }
  }
  EXPECT_EQ(make_ic_family(d, 20, 7).u, f.u);
  const auto loads = make_load_family(10, 0.3, 0.7, 3);
  for (double a : loads) EXPECT_TRUE(a >= 0.3 && a < 0.7);
  EXPECT_EQ(make_load_family(10, 0.3, 0.7, 3), loads);
}
