#pragma once

#include <utility>

namespace sacfem {

/// Linear isotropic material in CGS units.
struct Material {
  double E = 1e6;      ///< Young's modulus [dynes/cm^2]
  double nu = 0.3;     ///< Poisson ratio
  double rho = 1.0;    ///< density [g/cm^3]
  double alpha = 0.0;  ///< mass-proportional damping factor [1/s]
  double mu = 0.0;
  double lambda = 0.0;

  /// Validates the inputs and fills in the Lame coefficients.
  static Material make(double E, double nu, double rho, double alpha = 0.0);

  /// Dilatational-free wave speed used by the stable time step estimate.
  double wave_speed() const;
};

/// (mu, lambda) for Young's modulus E and Poisson ratio nu.
std::pair<double, double> lame_coefficients(double E, double nu);

}  // namespace sacfem
