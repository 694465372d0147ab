#pragma once

#include <memory>
#include <stdexcept>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "stationkeep/dynamics.hpp"

namespace stationkeep {

inline constexpr double kDefaultThetaMargin = 0.1;  // rad

/// Thrown when |theta| reaches the guarded band around +-pi/2.
class PitchSingularityError : public std::domain_error {
 public:
  explicit PitchSingularityError(double theta, double margin);
};

/// Earth-fixed position and Z-Y-X Euler orientation. Angles are stored
/// unwrapped; nothing is normalized silently.
struct PoseState {
  double x = 0.0, y = 0.0, z = 0.0;          // m
  double phi = 0.0, theta = 0.0, psi = 0.0;  // rad (roll, pitch, yaw)

  Vec6 vector() const;
  static PoseState from_vector(const Vec6& eta);
};

/// Body-fixed translational and angular velocity.
struct BodyVelocity {
  double u = 0.0, v = 0.0, w = 0.0;  // m/s
  double p = 0.0, q = 0.0, r = 0.0;  // rad/s

  Vec6 vector() const;
  static BodyVelocity from_vector(const Vec6& nu);
};

/// Rigid-body + added-mass model data. The constructor validates that M is
/// symmetric positive definite and, unless `allow_restoring_imbalance` is
/// set, that the vehicle is neutrally buoyant with the center of gravity
/// vertically below the center of buoyancy on the body z axis (z down).
class VehicleParams {
 public:
  VehicleParams(const Mat6& M, const Mat6& Dlin, const Vec6& Dquad,
                double weight_force, double buoyancy_force, const Vec3& r_g,
                const Vec3& r_b, bool allow_restoring_imbalance = false);

  const Mat6& inertia() const { return M_; }
  const Mat6& linear_damping() const { return Dlin_; }
  const Vec6& quadratic_damping() const { return Dquad_; }
  double weight_force() const { return weight_; }
  double buoyancy_force() const { return buoyancy_; }
  const Vec3& center_of_gravity() const { return r_g_; }
  const Vec3& center_of_buoyancy() const { return r_b_; }

  /// Smallest / largest eigenvalue of M (the inertia bounds).
  double m_lower() const { return m_lower_; }
  double m_upper() const { return m_upper_; }

  static VehicleParams from_json(const nlohmann::json& j);
  static VehicleParams load(const std::string& path);

  /// Generic small-vehicle defaults (configuration values, not measurements):
  /// diagonal inertia with added mass, positive damping, neutral buoyancy
  /// with a 7 cm metacentric lever. Mirrors scenarios/vehicle_generic.json.
  static VehicleParams generic();

 private:
  Mat6 M_, Dlin_;
  Vec6 Dquad_;
  double weight_ = 0.0, buoyancy_ = 0.0;
  Vec3 r_g_, r_b_;
  double m_lower_ = 0.0, m_upper_ = 0.0;
};

/// Game state [eta; eta_dot] in R^12.
struct StateVector {
  PoseState eta;
  Vec6 eta_dot = Vec6::Zero();  // earth-fixed pose rate

  Vec12 vector() const;
  static StateVector from_vector(const Vec12& zeta);
};

/// Transformed earth-fixed dynamics M_bar*eta_ddot + C_bar*eta_dot +
/// D_bar*eta_dot + g_bar = tau_bar_b + tau_bar_d.
struct EarthFixedDynamics {
  Mat6 M_bar, C_bar, D_bar;
  Vec6 g_bar;
};

// -- kinematics -------------------------------------------------------------

void require_valid_pitch(double theta, double theta_margin = kDefaultThetaMargin);

/// Z-Y-X Euler rotation, body to earth translational velocities.
Mat3 rotation_J1(const PoseState& eta, double theta_margin = kDefaultThetaMargin);

/// Body angular rates to Euler-angle rates (contains 1/cos(theta)).
Mat3 euler_rate_map_J2(const PoseState& eta, double theta_margin = kDefaultThetaMargin);

/// Block-diagonal [J1, 0; 0, J2].
Mat6 assemble_J(const PoseState& eta, double theta_margin = kDefaultThetaMargin);

/// Inverse built from the block structure (J1^T and the closed-form J2^-1),
/// never by general inversion.
Mat6 assemble_J_inverse(const PoseState& eta, double theta_margin = kDefaultThetaMargin);

/// Closed-form d/dt J along eta_dot (chain rule through the Euler angles).
Mat6 jacobian_J_dot(const PoseState& eta, const Vec6& eta_dot,
                    double theta_margin = kDefaultThetaMargin);

// -- body-frame dynamics ----------------------------------------------------

/// Skew-symmetric Coriolis/centripetal parameterization built from M and nu
/// (satisfies C = -C^T, hence nu^T C nu = 0).
Mat6 coriolis_matrix(const Mat6& M, const Vec6& nu);

/// D(nu) = Dlin + diag(Dquad_i * |nu_i|).
Mat6 damping_matrix(const VehicleParams& params, const Vec6& nu);

/// Gravitational/buoyancy force and moment vector g(eta).
Vec6 restoring_vector(const VehicleParams& params, const PoseState& eta);

/// nu_dot = M^-1 (tau_b + tau_d - C(nu)nu - D(nu)nu - g(eta)).
Vec6 body_accel(const BodyVelocity& nu, const PoseState& eta, const Vec6& tau_b,
                const Vec6& tau_d, const VehicleParams& params);

// -- earth-fixed / control-affine form --------------------------------------

EarthFixedDynamics earth_fixed_dynamics(const StateVector& state,
                                        const VehicleParams& params,
                                        double theta_margin = kDefaultThetaMargin);

/// f = [eta_dot; -Mb^-1(Cb*eta_dot + Db*eta_dot + gb)], g = [0; Mb^-1].
AffineDynamics control_affine(const StateVector& state, const VehicleParams& params,
                              double theta_margin = kDefaultThetaMargin);

/// DynamicsProvider over the 12-state AUV plant.
class AuvDynamics final : public DynamicsProvider {
 public:
  AuvDynamics(VehicleParams params, double theta_margin = kDefaultThetaMargin);

  int state_dim() const override { return 12; }
  int input_dim() const override { return 6; }
  AffineDynamics affine(const Eigen::VectorXd& zeta) const override;

  const VehicleParams& params() const { return params_; }
  double theta_margin() const { return theta_margin_; }

 private:
  VehicleParams params_;
  double theta_margin_;
};

}  // namespace stationkeep
