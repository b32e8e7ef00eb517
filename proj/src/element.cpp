#include "sacfem/element.hpp"

namespace sacfem {

template Matrix12<double> element_stiffness<double>(const Eigen::Matrix<double, 3, 4>&, const Material&, int);
template Vector12<double> element_lumped_mass<double>(const Eigen::Matrix<double, 3, 4>&, double, int);
template Matrix12<double> element_consistent_mass<double>(const Eigen::Matrix<double, 3, 4>&, double, int);

}  // namespace sacfem
