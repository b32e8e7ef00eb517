#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "sacfem/comm.hpp"

namespace sacfem {

/// Max-average cost summary; times in seconds per step, ratios in percent.
struct PerfSummary {
  double t_t = 0.0, t_e = 0.0, t_s = 0.0, t_m = 0.0, t_d = 0.0;
  double r_e = 0.0, r_s = 0.0, r_m = 0.0, r_d = 0.0;
  int n_a = 0;       ///< shared node count
  int n_c = 0;       ///< rank count
  int rank = 0;      ///< rank with the largest average total
  double zeta = 1.0; ///< speedup against the baseline, 1 when standalone
};

/// Number of leading steps dropped before averaging.
inline constexpr long kWarmupSteps = 100;

/// Averages each rank's per-step costs over steps [skip, end) and reports the
/// rank with the largest average total. Throws on empty input.
PerfSummary max_average(const std::vector<std::vector<StepTiming>>& timings, long skip = 0);

/// t_t(baseline) / t_t(accelerated).
double speedup(const PerfSummary& baseline, const PerfSummary& accelerated);

/// Componentwise median over repeated runs (t_t picks the run; all fields of
/// that run are reported).
PerfSummary median_summary(std::vector<PerfSummary> runs);

std::string to_json(const PerfSummary& s);
void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const std::string& label, const PerfSummary& s);

/// Per-step timing rows: step,rank,t_e,t_s,t_m,t_d.
void write_timing_csv(std::ostream& out, const std::vector<std::vector<StepTiming>>& timings);

}  // namespace sacfem
