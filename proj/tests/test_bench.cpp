#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sacfem/bench.hpp"

using namespace sacfem;

namespace {
StepTiming step(double e, double s, double m, double d) { return {e, s, m, d, e + s + m + d}; }
}  // namespace

TEST(MaxAverage, SingleRankConstant) {
  const std::vector<std::vector<StepTiming>> t{std::vector<StepTiming>(10, step(1e-3, 2e-3, 1e-3, 0))};
  const auto s = max_average(t);
  EXPECT_NEAR(s.t_t, 4e-3, 1e-15);
  EXPECT_NEAR(s.r_s, 50.0, 1e-12);
  EXPECT_NEAR(s.r_e + s.r_s + s.r_m + s.r_d, 100.0, 1e-9);
  EXPECT_EQ(s.n_c, 1);
}

TEST(MaxAverage, PicksSlowestRank) {
  const std::vector<std::vector<StepTiming>> t{std::vector<StepTiming>(5, step(1e-3, 1e-3, 2e-3, 0)),
                                               std::vector<StepTiming>(5, step(1e-3, 3e-3, 1e-3, 0))};
  const auto s = max_average(t);
  EXPECT_EQ(s.rank, 1);
  EXPECT_NEAR(s.t_t, 5e-3, 1e-15);
  EXPECT_NEAR(s.t_s, 3e-3, 1e-15);
}

TEST(MaxAverage, MatchesNaiveRecompute) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1e-3);
  std::vector<std::vector<StepTiming>> t(4);
  for (auto& r : t)
    for (int i = 0; i < 250; ++i) r.push_back(step(u(rng), u(rng), u(rng), u(rng)));
  const long skip = 100;
  const auto s = max_average(t, skip);
  double best = -1;
  int who = -1;
  for (int r = 0; r < 4; ++r) {
    double tot = 0;
    for (int i = skip; i < 250; ++i) tot += t[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)].t_t;
    tot /= 150;
    if (tot > best) {
      best = tot;
      who = r;
    }
  }
  double ts = 0;
  for (int i = skip; i < 250; ++i) ts += t[static_cast<std::size_t>(who)][static_cast<std::size_t>(i)].t_s;
  ts /= 150;
  EXPECT_EQ(s.rank, who);
  EXPECT_NEAR(s.t_t, best, 1e-12);
  EXPECT_NEAR(s.r_s, 100 * ts / best, 1e-12);
}

TEST(MaxAverage, EmptyRejected) {
  EXPECT_THROW(max_average({}), std::invalid_argument);
  EXPECT_THROW(max_average({std::vector<StepTiming>(5)}, 5), std::invalid_argument);
}

TEST(Speedup, Ratios) {
  PerfSummary a, b;
  a.t_t = 10e-3;
  b.t_t = 2e-3;
  EXPECT_DOUBLE_EQ(speedup(a, a), 1.0);
  EXPECT_DOUBLE_EQ(speedup(a, b), 5.0);
  b.t_t = 0;
  EXPECT_THROW(speedup(a, b), std::invalid_argument);
}

TEST(Median, MiddleRun) {
  std::vector<PerfSummary> runs(3);
  runs[0].t_t = 3;
  runs[1].t_t = 1;
  runs[2].t_t = 2;
  runs[2].rank = 7;
  EXPECT_EQ(median_summary(runs).rank, 7);
}

TEST(Output, JsonAndCsv) {
  PerfSummary s;
  s.t_t = 1e-3;
  s.zeta = 2.5;
  const auto j = nlohmann::json::parse(to_json(s));
  EXPECT_DOUBLE_EQ(j.at("zeta").get<double>(), 2.5);
  std::ostringstream csv;
  write_csv_header(csv);
  write_csv_row(csv, "base", s);
  const std::string text = csv.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  std::ostringstream tc;
  write_timing_csv(tc, {std::vector<StepTiming>(2), std::vector<StepTiming>(2)});
  const std::string rows = tc.str();
  EXPECT_EQ(std::count(rows.begin(), rows.end(), '\n'), 5);
}
