#include "stationkeep/dynamics.hpp"

#include <stdexcept>
#include <utility>

namespace stationkeep {

LinearDynamics::LinearDynamics(LinearPlant plant) : plant_(std::move(plant)) {
  if (plant_.A.rows() != plant_.A.cols() || plant_.B.rows() != plant_.A.rows())
    throw std::invalid_argument("linear plant dimensions are inconsistent");
}

AffineDynamics LinearDynamics::affine(const Eigen::VectorXd& zeta) const {
  if (zeta.size() != plant_.n())
    throw std::invalid_argument("state dimension does not match plant");
  return AffineDynamics{plant_.A * zeta, plant_.B};
}

}  // namespace stationkeep
