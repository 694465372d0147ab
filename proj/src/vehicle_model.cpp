#include "stationkeep/vehicle_model.hpp"

#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace stationkeep {

namespace {

Mat3 skew(const Vec3& v) {
  Mat3 s;
  s << 0.0, -v.z(), v.y(),  //
      v.z(), 0.0, -v.x(),   //
      -v.y(), v.x(), 0.0;
  return s;
}

Mat3 rot_z(double a) {
  Mat3 r;
  r << std::cos(a), -std::sin(a), 0.0,  //
      std::sin(a), std::cos(a), 0.0,    //
      0.0, 0.0, 1.0;
  return r;
}

Mat3 rot_y(double a) {
  Mat3 r;
  r << std::cos(a), 0.0, std::sin(a),  //
      0.0, 1.0, 0.0,                   //
      -std::sin(a), 0.0, std::cos(a);
  return r;
}

Mat3 rot_x(double a) {
  Mat3 r;
  r << 1.0, 0.0, 0.0,                   //
      0.0, std::cos(a), -std::sin(a),   //
      0.0, std::sin(a), std::cos(a);
  return r;
}

Mat3 drot_z(double a) {
  Mat3 r;
  r << -std::sin(a), -std::cos(a), 0.0,  //
      std::cos(a), -std::sin(a), 0.0,    //
      0.0, 0.0, 0.0;
  return r;
}

Mat3 drot_y(double a) {
  Mat3 r;
  r << -std::sin(a), 0.0, std::cos(a),  //
      0.0, 0.0, 0.0,                    //
      -std::cos(a), 0.0, -std::sin(a);
  return r;
}

Mat3 drot_x(double a) {
  Mat3 r;
  r << 0.0, 0.0, 0.0,                   //
      0.0, -std::sin(a), -std::cos(a),  //
      0.0, std::cos(a), -std::sin(a);
  return r;
}

Vec6 parse_vec6(const nlohmann::json& j, const std::string& key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 6)
    throw std::invalid_argument("vehicle field '" + key + "' must be an array of 6");
  Vec6 v;
  for (int i = 0; i < 6; ++i) v(i) = a.at(i).get<double>();
  return v;
}

Mat6 parse_mat6(const nlohmann::json& j, const std::string& key) {
  const auto& a = j.at(key);
  Mat6 m = Mat6::Zero();
  if (a.is_array() && a.size() == 6 && a.at(0).is_number()) {
    for (int i = 0; i < 6; ++i) m(i, i) = a.at(i).get<double>();
    return m;
  }
  if (a.is_array() && a.size() == 36) {
    for (int i = 0; i < 6; ++i)
      for (int c = 0; c < 6; ++c) m(i, c) = a.at(6 * i + c).get<double>();
    return m;
  }
  throw std::invalid_argument("vehicle field '" + key +
                              "' must be a 6-array (diagonal) or row-major 36-array");
}

Vec3 parse_vec3(const nlohmann::json& j, const std::string& key) {
  const auto& a = j.at(key);
  if (!a.is_array() || a.size() != 3)
    throw std::invalid_argument("vehicle field '" + key + "' must be an array of 3");
  return Vec3(a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>());
}

}  // namespace

PitchSingularityError::PitchSingularityError(double theta, double margin)
    : std::domain_error("pitch " + std::to_string(theta) +
                        " rad is inside the guarded band |theta| > pi/2 - " +
                        std::to_string(margin)) {}

void require_valid_pitch(double theta, double theta_margin) {
  if (!(std::abs(theta) <= M_PI / 2.0 - theta_margin))
    throw PitchSingularityError(theta, theta_margin);
}

Vec6 PoseState::vector() const {
  Vec6 v;
  v << x, y, z, phi, theta, psi;
  return v;
}

PoseState PoseState::from_vector(const Vec6& eta) {
  return PoseState{eta(0), eta(1), eta(2), eta(3), eta(4), eta(5)};
}

Vec6 BodyVelocity::vector() const {
  Vec6 v;
  v << u, this->v, w, p, q, r;
  return v;
}

BodyVelocity BodyVelocity::from_vector(const Vec6& nu) {
  return BodyVelocity{nu(0), nu(1), nu(2), nu(3), nu(4), nu(5)};
}

VehicleParams::VehicleParams(const Mat6& M, const Mat6& Dlin, const Vec6& Dquad,
                             double weight_force, double buoyancy_force,
                             const Vec3& r_g, const Vec3& r_b,
                             bool allow_restoring_imbalance)
    : M_(M),
      Dlin_(Dlin),
      Dquad_(Dquad),
      weight_(weight_force),
      buoyancy_(buoyancy_force),
      r_g_(r_g),
      r_b_(r_b) {
  if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1.0 + M.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("inertia matrix M must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat6> eig(M);
  m_lower_ = eig.eigenvalues().minCoeff();
  m_upper_ = eig.eigenvalues().maxCoeff();
  if (m_lower_ <= 0.0)
    throw std::invalid_argument("inertia matrix M must be positive definite");
  if (!M.allFinite() || !Dlin.allFinite() || !Dquad.allFinite())
    throw std::invalid_argument("vehicle parameters must be finite");

  if (allow_restoring_imbalance) return;
  const double scale = std::max(1.0, std::abs(weight_));
  if (std::abs(weight_ - buoyancy_) > 1e-9 * scale)
    throw std::invalid_argument(
        "vehicle must be neutrally buoyant (weight_force == buoyancy_force); "
        "pass the override flag to bypass");
  if (std::abs(r_g_.x()) > 1e-12 || std::abs(r_g_.y()) > 1e-12 ||
      std::abs(r_b_.x()) > 1e-12 || std::abs(r_b_.y()) > 1e-12)
    throw std::invalid_argument(
        "centers of gravity and buoyancy must lie on the body z axis; "
        "pass the override flag to bypass");
  if (r_g_.z() < r_b_.z() - 1e-12)
    throw std::invalid_argument(
        "center of gravity must be below the center of buoyancy (z down); "
        "pass the override flag to bypass");
}

VehicleParams VehicleParams::from_json(const nlohmann::json& j) {
  return VehicleParams(parse_mat6(j, "M"), parse_mat6(j, "Dlin"),
                       parse_vec6(j, "Dquad"), j.at("weight_force").get<double>(),
                       j.at("buoyancy_force").get<double>(), parse_vec3(j, "r_g"),
                       parse_vec3(j, "r_b"),
                       j.value("allow_restoring_imbalance", false));
}

VehicleParams VehicleParams::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open vehicle file: " + path);
  nlohmann::json j;
  in >> j;
  return from_json(j);
}

VehicleParams VehicleParams::generic() {
  Mat6 m = Mat6::Zero();
  m.diagonal() << 70.0, 80.0, 90.0, 2.0, 2.8, 3.1;  // rigid body + added mass
  Mat6 dlin = Mat6::Zero();
  dlin.diagonal() << 30.0, 40.0, 50.0, 3.0, 4.0, 4.0;
  Vec6 dquad;
  dquad << 35.0, 45.0, 60.0, 5.0, 5.0, 5.0;
  return VehicleParams(m, dlin, dquad, 490.5, 490.5, Vec3(0.0, 0.0, 0.05),
                       Vec3(0.0, 0.0, -0.02));
}

Vec12 StateVector::vector() const {
  Vec12 v;
  v.head<6>() = eta.vector();
  v.tail<6>() = eta_dot;
  return v;
}

StateVector StateVector::from_vector(const Vec12& zeta) {
  StateVector s;
  s.eta = PoseState::from_vector(zeta.head<6>());
  s.eta_dot = zeta.tail<6>();
  return s;
}

Mat3 rotation_J1(const PoseState& eta, double theta_margin) {
  require_valid_pitch(eta.theta, theta_margin);
  const double sphi = std::sin(eta.phi), cphi = std::cos(eta.phi);
  const double sth = std::sin(eta.theta), cth = std::cos(eta.theta);
  const double spsi = std::sin(eta.psi), cpsi = std::cos(eta.psi);
  Mat3 j1;
  j1 << cpsi * cth, -spsi * cphi + cpsi * sth * sphi, spsi * sphi + cpsi * sth * cphi,
      spsi * cth, cpsi * cphi + spsi * sth * sphi, -cpsi * sphi + spsi * sth * cphi,
      -sth, cth * sphi, cth * cphi;
  return j1;
}

Mat3 euler_rate_map_J2(const PoseState& eta, double theta_margin) {
  require_valid_pitch(eta.theta, theta_margin);
  const double sphi = std::sin(eta.phi), cphi = std::cos(eta.phi);
  const double cth = std::cos(eta.theta), tth = std::tan(eta.theta);
  Mat3 j2;
  j2 << 1.0, sphi * tth, cphi * tth,  //
      0.0, cphi, -sphi,               //
      0.0, sphi / cth, cphi / cth;
  return j2;
}

Mat6 assemble_J(const PoseState& eta, double theta_margin) {
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = rotation_J1(eta, theta_margin);
  j.bottomRightCorner<3, 3>() = euler_rate_map_J2(eta, theta_margin);
  return j;
}

Mat6 assemble_J_inverse(const PoseState& eta, double theta_margin) {
  require_valid_pitch(eta.theta, theta_margin);
  const double sphi = std::sin(eta.phi), cphi = std::cos(eta.phi);
  const double sth = std::sin(eta.theta), cth = std::cos(eta.theta);
  // J2^-1 maps Euler-angle rates back to body angular rates.
  Mat3 j2inv;
  j2inv << 1.0, 0.0, -sth,      //
      0.0, cphi, cth * sphi,    //
      0.0, -sphi, cth * cphi;
  Mat6 jinv = Mat6::Zero();
  jinv.topLeftCorner<3, 3>() = rotation_J1(eta, theta_margin).transpose();
  jinv.bottomRightCorner<3, 3>() = j2inv;
  return jinv;
}

Mat6 jacobian_J_dot(const PoseState& eta, const Vec6& eta_dot, double theta_margin) {
  require_valid_pitch(eta.theta, theta_margin);
  const double phi_dot = eta_dot(3), theta_dot = eta_dot(4), psi_dot = eta_dot(5);

  const Mat3 rz = rot_z(eta.psi), ry = rot_y(eta.theta), rx = rot_x(eta.phi);
  const Mat3 j1_dot = drot_z(eta.psi) * ry * rx * psi_dot +
                      rz * drot_y(eta.theta) * rx * theta_dot +
                      rz * ry * drot_x(eta.phi) * phi_dot;

  const double sphi = std::sin(eta.phi), cphi = std::cos(eta.phi);
  const double sth = std::sin(eta.theta), cth = std::cos(eta.theta);
  const double tth = sth / cth, sec2 = 1.0 / (cth * cth);
  Mat3 dj2_dphi, dj2_dtheta;
  dj2_dphi << 0.0, cphi * tth, -sphi * tth,  //
      0.0, -sphi, -cphi,                     //
      0.0, cphi / cth, -sphi / cth;
  dj2_dtheta << 0.0, sphi * sec2, cphi * sec2,  //
      0.0, 0.0, 0.0,                            //
      0.0, sphi * sth * sec2, cphi * sth * sec2;
  const Mat3 j2_dot = dj2_dphi * phi_dot + dj2_dtheta * theta_dot;

  Mat6 j_dot = Mat6::Zero();
  j_dot.topLeftCorner<3, 3>() = j1_dot;
  j_dot.bottomRightCorner<3, 3>() = j2_dot;
  return j_dot;
}

Mat6 coriolis_matrix(const Mat6& M, const Vec6& nu) {
  const Vec3 nu1 = nu.head<3>(), nu2 = nu.tail<3>();
  const Vec3 a = M.topLeftCorner<3, 3>() * nu1 + M.topRightCorner<3, 3>() * nu2;
  const Vec3 b = M.bottomLeftCorner<3, 3>() * nu1 + M.bottomRightCorner<3, 3>() * nu2;
  Mat6 c = Mat6::Zero();
  c.topRightCorner<3, 3>() = -skew(a);
  c.bottomLeftCorner<3, 3>() = -skew(a);
  c.bottomRightCorner<3, 3>() = -skew(b);
  return c;
}

Mat6 damping_matrix(const VehicleParams& params, const Vec6& nu) {
  Mat6 d = params.linear_damping();
  d.diagonal() += params.quadratic_damping().cwiseProduct(nu.cwiseAbs());
  return d;
}

Vec6 restoring_vector(const VehicleParams& params, const PoseState& eta) {
  const double W = params.weight_force(), B = params.buoyancy_force();
  const Vec3& rg = params.center_of_gravity();
  const Vec3& rb = params.center_of_buoyancy();
  const double sphi = std::sin(eta.phi), cphi = std::cos(eta.phi);
  const double sth = std::sin(eta.theta), cth = std::cos(eta.theta);
  Vec6 g;
  g << (W - B) * sth,                                                     //
      -(W - B) * cth * sphi,                                              //
      -(W - B) * cth * cphi,                                              //
      -(rg.y() * W - rb.y() * B) * cth * cphi +
          (rg.z() * W - rb.z() * B) * cth * sphi,                         //
      (rg.z() * W - rb.z() * B) * sth +
          (rg.x() * W - rb.x() * B) * cth * cphi,                         //
      -(rg.x() * W - rb.x() * B) * cth * sphi - (rg.y() * W - rb.y() * B) * sth;
  return g;
}

Vec6 body_accel(const BodyVelocity& nu, const PoseState& eta, const Vec6& tau_b,
                const Vec6& tau_d, const VehicleParams& params) {
  const Vec6 v = nu.vector();
  const Vec6 rhs = tau_b + tau_d - coriolis_matrix(params.inertia(), v) * v -
                   damping_matrix(params, v) * v - restoring_vector(params, eta);
  return params.inertia().ldlt().solve(rhs);
}

EarthFixedDynamics earth_fixed_dynamics(const StateVector& state,
                                        const VehicleParams& params,
                                        double theta_margin) {
  const Mat6 jinv = assemble_J_inverse(state.eta, theta_margin);
  const Mat6 j_dot = jacobian_J_dot(state.eta, state.eta_dot, theta_margin);
  const Vec6 nu = jinv * state.eta_dot;

  const Mat6 c = coriolis_matrix(params.inertia(), nu);
  const Mat6 d = damping_matrix(params, nu);

  EarthFixedDynamics out;
  out.M_bar = jinv.transpose() * params.inertia() * jinv;
  out.C_bar = jinv.transpose() * (c - params.inertia() * jinv * j_dot) * jinv;
  out.D_bar = jinv.transpose() * d * jinv;
  out.g_bar = jinv.transpose() * restoring_vector(params, state.eta);
  return out;
}

AffineDynamics control_affine(const StateVector& state, const VehicleParams& params,
                              double theta_margin) {
  const EarthFixedDynamics ef = earth_fixed_dynamics(state, params, theta_margin);
  const Eigen::LDLT<Mat6> mbar(ef.M_bar);

  AffineDynamics dyn;
  dyn.f.resize(12);
  dyn.f.head<6>() = state.eta_dot;
  dyn.f.tail<6>() =
      -mbar.solve(ef.C_bar * state.eta_dot + ef.D_bar * state.eta_dot + ef.g_bar);

  Mat6 mbar_inv = mbar.solve(Mat6::Identity());
  mbar_inv = 0.5 * (mbar_inv + mbar_inv.transpose()).eval();
  dyn.g = Eigen::MatrixXd::Zero(12, 6);
  dyn.g.bottomRows<6>() = mbar_inv;
  return dyn;
}

AuvDynamics::AuvDynamics(VehicleParams params, double theta_margin)
    : params_(std::move(params)), theta_margin_(theta_margin) {}

AffineDynamics AuvDynamics::affine(const Eigen::VectorXd& zeta) const {
  if (zeta.size() != 12)
    throw std::invalid_argument("AUV state must have dimension 12");
  return control_affine(StateVector::from_vector(zeta), params_, theta_margin_);
}

}  // namespace stationkeep
