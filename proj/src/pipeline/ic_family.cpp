#include "sacfem/pipeline/metrics.hpp"

#include <random>
#include <stdexcept>

namespace sacfem::pipeline {

IcFamily make_ic_family(const Eigen::VectorXd& d_bar, int count, std::uint64_t seed) {
  if (count < 0) throw std::invalid_argument("make_ic_family: negative count");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-0.25, 0.25);
  IcFamily out;
  for (int i = 0; i < count; ++i) {
    const double u = dist(rng);
    out.u.push_back(u);
    out.d0.push_back((1.0 + u) * d_bar);
  }
  return out;
}

std::vector<double> make_load_family(int count, double lo, double hi, std::uint64_t seed) {
  if (count < 0 || hi < lo) throw std::invalid_argument("make_load_family: invalid arguments");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(dist(rng));
  return out;
}

}  // namespace sacfem::pipeline
