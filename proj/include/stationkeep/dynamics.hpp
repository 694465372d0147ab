#pragma once

#include <Eigen/Dense>

namespace stationkeep {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Vec12 = Eigen::Matrix<double, 12, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Control-affine dynamics zeta_dot = f + g*(u1 + u2), state dim n, input dim k.
struct AffineDynamics {
  Eigen::VectorXd f;  // n
  Eigen::MatrixXd g;  // n x k
};

/// Plant abstraction consumed by the game, learner and simulator.
class DynamicsProvider {
 public:
  virtual ~DynamicsProvider() = default;
  virtual int state_dim() const = 0;
  virtual int input_dim() const = 0;
  virtual AffineDynamics affine(const Eigen::VectorXd& zeta) const = 0;
};

/// Linear time-invariant plant zeta_dot = A*zeta + B*(u1 + u2).
struct LinearPlant {
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  int n() const { return static_cast<int>(A.rows()); }
  int k() const { return static_cast<int>(B.cols()); }
};

class LinearDynamics final : public DynamicsProvider {
 public:
  explicit LinearDynamics(LinearPlant plant);

  int state_dim() const override { return plant_.n(); }
  int input_dim() const override { return plant_.k(); }
  AffineDynamics affine(const Eigen::VectorXd& zeta) const override;

  const LinearPlant& plant() const { return plant_; }

 private:
  LinearPlant plant_;
};

}  // namespace stationkeep
