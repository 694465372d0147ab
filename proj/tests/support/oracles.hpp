// Independent test oracles. Everything here is deliberately implemented on a
// different path than the library code it checks: the CARE solve goes through
// the Hamiltonian eigenvector method (the library uses Newton/Kleinman), and
// the plant reference integrates the body-frame equations directly (the
// library simulates in the earth-fixed affine form).
#pragma once

#include <Eigen/Dense>
#include <stdexcept>

#include "stationkeep/rng.hpp"
#include "stationkeep/vehicle_model.hpp"

namespace stationkeep::testing {

/// Stabilizing CARE solution A'P + PA + Q - P B R^-1 B' P = 0 from the stable
/// invariant subspace of the Hamiltonian matrix.
inline Eigen::MatrixXd eigen_care_solve(const Eigen::MatrixXd& a,
                                        const Eigen::MatrixXd& b,
                                        const Eigen::MatrixXd& q,
                                        const Eigen::MatrixXd& r) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = a;
  h.topRightCorner(n, n) = -b * r.ldlt().solve(Eigen::MatrixXd(b.transpose()));
  h.bottomLeftCorner(n, n) = -q;
  h.bottomRightCorner(n, n) = -a.transpose();

  const Eigen::EigenSolver<Eigen::MatrixXd> eig(h);
  Eigen::MatrixXcd basis(2 * n, n);
  Eigen::Index found = 0;
  for (Eigen::Index i = 0; i < 2 * n && found < n; ++i)
    if (eig.eigenvalues()(i).real() < 0.0) basis.col(found++) = eig.eigenvectors().col(i);
  if (found != n) throw std::runtime_error("Hamiltonian has no stable n-subspace");

  const Eigen::MatrixXcd x1 = basis.topRows(n);
  const Eigen::MatrixXcd x2 = basis.bottomRows(n);
  const Eigen::MatrixXd p = (x2 * x1.inverse()).real();
  return 0.5 * (p + p.transpose());
}

inline PoseState random_attitude(DeterministicRng& rng, double pitch_limit = 1.37) {
  PoseState eta;
  eta.x = rng.uniform(-2.0, 2.0);
  eta.y = rng.uniform(-2.0, 2.0);
  eta.z = rng.uniform(-2.0, 2.0);
  eta.phi = rng.uniform(-M_PI, M_PI);
  eta.theta = rng.uniform(-pitch_limit, pitch_limit);
  eta.psi = rng.uniform(-M_PI, M_PI);
  return eta;
}

inline StateVector random_state(DeterministicRng& rng, double rate_scale = 1.0,
                                double pitch_limit = 1.2) {
  StateVector s;
  s.eta = random_attitude(rng, pitch_limit);
  for (int i = 0; i < 6; ++i) s.eta_dot(i) = rng.uniform(-rate_scale, rate_scale);
  return s;
}

/// RK4 on the body-frame pair (eta, nu) with an earth-frame force law
/// tau_bar(t, zeta): eta_dot = J nu, nu_dot from the body equation with
/// tau_b = J' tau_bar.
template <typename TauBarFn>
std::pair<PoseState, Vec6> integrate_body_frame(const VehicleParams& params,
                                                PoseState eta0, Vec6 nu0, double t_end,
                                                double dt, TauBarFn&& tau_bar) {
  using State = Eigen::Matrix<double, 12, 1>;
  State x;
  x.head<6>() = eta0.vector();
  x.tail<6>() = nu0;

  const auto rhs = [&](const State& s, double t) {
    const PoseState eta = PoseState::from_vector(s.head<6>());
    const Vec6 nu = s.tail<6>();
    const Mat6 j = assemble_J(eta);
    const Vec6 eta_dot = j * nu;
    Eigen::VectorXd zeta(12);
    zeta << s.head<6>(), eta_dot;
    const Vec6 tb = j.transpose() * tau_bar(t, zeta);
    State dx;
    dx.head<6>() = eta_dot;
    dx.tail<6>() = body_accel(BodyVelocity::from_vector(nu), eta, tb, Vec6::Zero(), params);
    return dx;
  };

  const long steps = std::lround(t_end / dt);
  for (long i = 0; i < steps; ++i) {
    const double t = i * dt;
    const State k1 = rhs(x, t);
    const State k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
    const State k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
    const State k4 = rhs(x + dt * k3, t + dt);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return {PoseState::from_vector(x.head<6>()), Vec6(x.tail<6>())};
}

}  // namespace stationkeep::testing
