#include "sacfem/material.hpp"

#include <cmath>
#include <stdexcept>
#include <tuple>

namespace sacfem {

std::pair<double, double> lame_coefficients(double E, double nu) {
  if (!(E > 0)) throw std::invalid_argument("lame_coefficients: E must be positive");
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("lame_coefficients: nu must lie in [0, 0.5)");
  const double mu = E / (2.0 * (1.0 + nu));
  const double lambda = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
  return {mu, lambda};
}

Material Material::make(double E, double nu, double rho, double alpha) {
  if (!(rho > 0)) throw std::invalid_argument("material: rho must be positive");
  if (!(alpha >= 0)) throw std::invalid_argument("material: alpha must be non-negative");
  Material m;
  m.E = E;
  m.nu = nu;
  m.rho = rho;
  m.alpha = alpha;
  std::tie(m.mu, m.lambda) = lame_coefficients(E, nu);
  return m;
}

double Material::wave_speed() const { return std::sqrt(E / (rho * (1.0 - nu * nu))); }

}  // namespace sacfem
