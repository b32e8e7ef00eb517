#include "sacfem/stability.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "sacfem/element.hpp"

namespace sacfem {

namespace {

void check_alpha_s(double alpha_s) {
  if (!(alpha_s > 0.0 && alpha_s < 1.0)) throw std::invalid_argument("safety factor alpha_s must lie in (0, 1)");
}

double element_step(double alpha_s, double h, double E, double rho, double nu) {
  return alpha_s * h / std::sqrt(E / (rho * (1.0 - nu * nu)));
}

}  // namespace

SizeMeasure parse_size_measure(const std::string& name) {
  if (name == "insphere") return SizeMeasure::Insphere;
  if (name == "circumsphere") return SizeMeasure::Circumsphere;
  throw std::invalid_argument("unknown element size measure: " + name);
}

const char* to_string(SizeMeasure m) { return m == SizeMeasure::Insphere ? "insphere" : "circumsphere"; }

Eigen::VectorXd element_sizes(const Mesh& mesh, SizeMeasure measure) {
  Eigen::VectorXd h(mesh.n_elems());
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const auto x = mesh.element_coords(e);
    if (std::abs(tet_signed_volume(x)) <= kDegenerateVolume)
      throw DegenerateElementError(e, "degenerate tetrahedron (element " + std::to_string(e) + ")");
    if (measure == SizeMeasure::Insphere) {
      h[e] = insphere_diameter(x);
      continue;
    }
    bool degenerate = false;
    h[e] = circumsphere_diameter(x, &degenerate);
    if (degenerate) std::clog << "warning: element " << e << " circumsphere ill-conditioned, using longest edge\n";
  }
  return h;
}

Eigen::VectorXd element_time_steps(const Mesh& mesh, const Material& mat, double alpha_s,
                                   const Eigen::VectorXd& rho_e, SizeMeasure measure) {
  check_alpha_s(alpha_s);
  const Eigen::VectorXd h = element_sizes(mesh, measure);
  Eigen::VectorXd dt(h.size());
  for (Eigen::Index e = 0; e < h.size(); ++e)
    dt[e] = element_step(alpha_s, h[e], mat.E, rho_e.size() ? rho_e[e] : mat.rho, mat.nu);
  return dt;
}

double cfl_time_step(const Mesh& mesh, const Material& mat, double alpha_s, SizeMeasure measure) {
  check_alpha_s(alpha_s);
  return element_step(alpha_s, element_sizes(mesh, measure).minCoeff(), mat.E, mat.rho, mat.nu);
}

MassScaling mass_scale_to(const Mesh& mesh, const Material& mat, const Eigen::VectorXd& rho_e, double dt_hat,
                          double alpha_s, SizeMeasure measure) {
  check_alpha_s(alpha_s);
  const Eigen::VectorXd h = element_sizes(mesh, measure);
  MassScaling out;
  out.dt_hat = dt_hat;
  out.rho_hat.resize(h.size());
  double original = 0.0, scaled = 0.0;
  for (int e = 0; e < mesh.n_elems(); ++e) {
    const double rho = rho_e.size() ? rho_e[e] : mat.rho;
    const double dt_e = element_step(alpha_s, h[e], mat.E, rho, mat.nu);
    out.rho_hat[e] =
        dt_e < dt_hat ? mat.E * dt_hat * dt_hat / (alpha_s * alpha_s * h[e] * h[e] * (1.0 - mat.nu * mat.nu)) : rho;
    const double volume = std::abs(tet_signed_volume(mesh.element_coords(e)));
    original += mat.rho * volume;
    scaled += out.rho_hat[e] * volume;
  }
  out.mass_increase_pct = 100.0 * (scaled - original) / original;
  return out;
}

MassScaling mass_scale(const Mesh& mesh, const Material& mat, double beta, double alpha_s, SizeMeasure measure) {
  if (!(beta >= 1.0)) throw std::invalid_argument("mass_scale: beta must be >= 1");
  return mass_scale_to(mesh, mat, {}, beta * cfl_time_step(mesh, mat, alpha_s, measure), alpha_s, measure);
}

}  // namespace sacfem
