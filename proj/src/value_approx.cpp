#include "stationkeep/value_approx.hpp"

#include <cmath>
#include <stdexcept>

namespace stationkeep {

QuadraticBasis::QuadraticBasis(int n) : n_(n), m_(n * (n + 1) / 2) {
  if (n < 1) throw std::invalid_argument("basis dimension must be >= 1");
}

int QuadraticBasis::monomial_index(int i, int j) const {
  if (i > j || i < 0 || j >= n_) throw std::out_of_range("monomial index");
  // Features for row i start after the i previous rows of lengths n, n-1, ...
  return i * n_ - i * (i - 1) / 2 + (j - i);
}

Eigen::VectorXd QuadraticBasis::sigma(const Eigen::VectorXd& zeta) const {
  if (zeta.size() != n_) throw std::invalid_argument("state dimension mismatch");
  Eigen::VectorXd s(m_);
  int k = 0;
  for (int i = 0; i < n_; ++i)
    for (int j = i; j < n_; ++j) s(k++) = zeta(i) * zeta(j);
  return s;
}

Eigen::MatrixXd QuadraticBasis::sigma_jacobian(const Eigen::VectorXd& zeta) const {
  if (zeta.size() != n_) throw std::invalid_argument("state dimension mismatch");
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m_, n_);
  int k = 0;
  for (int i = 0; i < n_; ++i) {
    for (int j = i; j < n_; ++j) {
      jac(k, i) += zeta(j);
      jac(k, j) += zeta(i);
      ++k;
    }
  }
  return jac;
}

std::unique_ptr<BasisSet> make_basis(const std::string& name, int dim) {
  if (name == "quadratic") return std::make_unique<QuadraticBasis>(dim);
  throw std::invalid_argument("unknown basis: " + name);
}

double value_estimate(const Eigen::VectorXd& wc, const Eigen::VectorXd& zeta,
                      const BasisSet& basis) {
  if (wc.size() != basis.size()) throw std::invalid_argument("weight size mismatch");
  return wc.dot(basis.sigma(zeta));
}

Eigen::VectorXd policy_hat(const Eigen::VectorXd& w, const Eigen::VectorXd& zeta,
                           const BasisSet& basis, const AffineDynamics& dyn,
                           const GameCost& cost, Player which) {
  const Eigen::VectorXd grad = basis.sigma_jacobian(zeta).transpose() * w;
  const Eigen::VectorXd gt_grad = dyn.g.transpose() * grad;
  if (which == Player::one) return -0.5 * cost.R.ldlt().solve(gt_grad);
  return gt_grad / (2.0 * cost.gamma * cost.gamma);
}

Regressor regressor(const Eigen::VectorXd& zeta, const Eigen::VectorXd& u1_hat,
                    const Eigen::VectorXd& u2_hat, const BasisSet& basis,
                    const AffineDynamics& dyn) {
  Regressor r;
  r.omega = basis.sigma_jacobian(zeta) * (dyn.f + dyn.g * (u1_hat + u2_hat));
  r.p = std::sqrt(1.0 + r.omega.squaredNorm());
  return r;
}

BellmanError bellman_error(const Eigen::VectorXd& zeta, const WeightSet& weights,
                           const BasisSet& basis, const AffineDynamics& dyn,
                           const GameCost& cost) {
  const Eigen::VectorXd u1 = policy_hat(weights.Wa1, zeta, basis, dyn, cost, Player::one);
  const Eigen::VectorXd u2 = policy_hat(weights.Wa2, zeta, basis, dyn, cost, Player::two);
  const Regressor reg = regressor(zeta, u1, u2, basis, dyn);

  BellmanError be;
  be.delta = local_cost(zeta, u1, u2, cost) + weights.Wc.dot(reg.omega);
  be.omega = reg.omega;
  be.p = reg.p;
  return be;
}

GMatrices g_matrices(const Eigen::VectorXd& zeta, const BasisSet& basis,
                     const AffineDynamics& dyn, const GameCost& cost) {
  GMatrices gm;
  const Eigen::MatrixXd jac = basis.sigma_jacobian(zeta);
  gm.G1 = dyn.g * cost.R.ldlt().solve(dyn.g.transpose());
  gm.G2 = dyn.g * dyn.g.transpose() / (cost.gamma * cost.gamma);
  gm.Gs1 = jac * gm.G1 * jac.transpose();
  gm.Gs2 = jac * gm.G2 * jac.transpose();
  return gm;
}

}  // namespace stationkeep
