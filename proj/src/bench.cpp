#include "sacfem/bench.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sacfem {

PerfSummary max_average(const std::vector<std::vector<StepTiming>>& timings, long skip) {
  if (timings.empty()) throw std::invalid_argument("max_average: no ranks");
  PerfSummary best;
  bool have = false;
  for (std::size_t r = 0; r < timings.size(); ++r) {
    const auto& series = timings[r];
    const long n = static_cast<long>(series.size()) - skip;
    if (n <= 0) throw std::invalid_argument("max_average: rank " + std::to_string(r) + " has no steps after warm-up");
    PerfSummary s;
    for (long i = skip; i < static_cast<long>(series.size()); ++i) {
      const auto& t = series[static_cast<std::size_t>(i)];
      s.t_t += t.t_t;
      s.t_e += t.t_e;
      s.t_s += t.t_s;
      s.t_m += t.t_m;
      s.t_d += t.t_d;
    }
    const double inv = 1.0 / static_cast<double>(n);
    s.t_t *= inv;
    s.t_e *= inv;
    s.t_s *= inv;
    s.t_m *= inv;
    s.t_d *= inv;
    s.rank = static_cast<int>(r);
    if (!have || s.t_t > best.t_t) {
      best = s;
      have = true;
    }
  }
  if (best.t_t > 0) {
    best.r_e = 100.0 * best.t_e / best.t_t;
    best.r_s = 100.0 * best.t_s / best.t_t;
    best.r_m = 100.0 * best.t_m / best.t_t;
    best.r_d = 100.0 * best.t_d / best.t_t;
  }
  best.n_c = static_cast<int>(timings.size());
  return best;
}

double speedup(const PerfSummary& baseline, const PerfSummary& accelerated) {
  if (!(accelerated.t_t > 0)) throw std::invalid_argument("speedup: accelerated total time is zero");
  return baseline.t_t / accelerated.t_t;
}

PerfSummary median_summary(std::vector<PerfSummary> runs) {
  if (runs.empty()) throw std::invalid_argument("median_summary: no runs");
  std::sort(runs.begin(), runs.end(), [](const PerfSummary& a, const PerfSummary& b) { return a.t_t < b.t_t; });
  return runs[runs.size() / 2];
}

std::string to_json(const PerfSummary& s) {
  nlohmann::ordered_json j;
  j["t_t"] = s.t_t;
  j["t_e"] = s.t_e;
  j["t_s"] = s.t_s;
  j["t_m"] = s.t_m;
  j["t_d"] = s.t_d;
  j["r_e"] = s.r_e;
  j["r_s"] = s.r_s;
  j["r_m"] = s.r_m;
  j["r_d"] = s.r_d;
  j["N_a"] = s.n_a;
  j["n_c"] = s.n_c;
  j["rank"] = s.rank;
  j["zeta"] = s.zeta;
  return j.dump(2);
}

void write_csv_header(std::ostream& out) {
  out << "label,t_t,t_e,t_s,t_m,t_d,r_e,r_s,r_m,r_d,N_a,n_c,rank,zeta\n";
}

void write_csv_row(std::ostream& out, const std::string& label, const PerfSummary& s) {
  std::ostringstream line;
  line << std::setprecision(10) << label << ',' << s.t_t << ',' << s.t_e << ',' << s.t_s << ',' << s.t_m << ','
       << s.t_d << ',' << s.r_e << ',' << s.r_s << ',' << s.r_m << ',' << s.r_d << ',' << s.n_a << ',' << s.n_c
       << ',' << s.rank << ',' << s.zeta << '\n';
  out << line.str();
}

void write_timing_csv(std::ostream& out, const std::vector<std::vector<StepTiming>>& timings) {
  out << "step,rank,t_e,t_s,t_m,t_d\n" << std::setprecision(10);
  const std::size_t n = timings.empty() ? 0 : timings.front().size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < timings.size(); ++r) {
      const auto& t = timings[r][i];
      out << (i + 1) << ',' << r << ',' << t.t_e << ',' << t.t_s << ',' << t.t_m << ',' << t.t_d << '\n';
    }
}

}  // namespace sacfem
