#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "sacfem/material.hpp"
#include "sacfem/mesh.hpp"

namespace sacfem {

/// Length h_e entering the stable step. The insphere diameter bounds the
/// lumped linear-tet limit from below; the circumsphere diameter is larger
/// and can exceed it.
enum class SizeMeasure { Insphere, Circumsphere };

SizeMeasure parse_size_measure(const std::string& name);
const char* to_string(SizeMeasure m);

/// h_e, one per element.
Eigen::VectorXd element_sizes(const Mesh& mesh, SizeMeasure measure = SizeMeasure::Insphere);

/// Stable step alpha_s * h_e / c for every element, using per-element density
/// when `rho_e` is non-empty.
Eigen::VectorXd element_time_steps(const Mesh& mesh, const Material& mat, double alpha_s,
                                   const Eigen::VectorXd& rho_e = {},
                                   SizeMeasure measure = SizeMeasure::Insphere);

/// Global stable step: alpha_s * min_e h_e / sqrt(E / (rho (1 - nu^2))).
double cfl_time_step(const Mesh& mesh, const Material& mat, double alpha_s,
                     SizeMeasure measure = SizeMeasure::Insphere);

struct MassScaling {
  Eigen::VectorXd rho_hat;  ///< per-element density [g/cm^3]
  double mass_increase_pct = 0.0;
  double dt_hat = 0.0;
};

/// Raises the density of every element whose stable step is below
/// beta * cfl_time_step so that it reaches the target step.
MassScaling mass_scale(const Mesh& mesh, const Material& mat, double beta, double alpha_s,
                       SizeMeasure measure = SizeMeasure::Insphere);

/// Same rule for an explicit target step, starting from per-element densities.
MassScaling mass_scale_to(const Mesh& mesh, const Material& mat, const Eigen::VectorXd& rho_e, double dt_hat,
                          double alpha_s, SizeMeasure measure = SizeMeasure::Insphere);

}  // namespace sacfem
