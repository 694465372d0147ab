#include "stationkeep/zs_game.hpp"

#include <stdexcept>

namespace stationkeep {

namespace {

double min_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double max_eig_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

}  // namespace

void GameCost::validate(bool strict_attenuation) const {
  if (Q.rows() != Q.cols() || R.rows() != R.cols())
    throw std::invalid_argument("Q and R must be square");
  if ((R - R.transpose()).cwiseAbs().maxCoeff() >
      1e-9 * (1.0 + R.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("R must be symmetric");
  if (q_lower() <= 0.0) throw std::invalid_argument("Q must be positive definite");
  if (r_min_eig() <= 0.0) throw std::invalid_argument("R must be positive definite");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (strict_attenuation && r_min_eig() < gamma * gamma)
    throw std::invalid_argument(
        "strict attenuation mode requires lambda_min(R) >= gamma^2");
}

double GameCost::q_lower() const { return min_eig_sym(0.5 * (Q + Q.transpose())); }
double GameCost::q_upper() const { return max_eig_sym(0.5 * (Q + Q.transpose())); }
double GameCost::r_min_eig() const { return min_eig_sym(0.5 * (R + R.transpose())); }

void LearnerGains::validate() const {
  if (!(eta_c > 0.0) || !(eta_a1 > 0.0) || !(eta_a2 > 0.0))
    throw std::invalid_argument("adaptation gains must be strictly positive");
}

double local_cost(const Eigen::VectorXd& zeta, const Eigen::VectorXd& u1,
                  const Eigen::VectorXd& u2, const GameCost& cost) {
  return zeta.dot(cost.Q * zeta) + u1.dot(cost.R * u1) -
         cost.gamma * cost.gamma * u2.squaredNorm();
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> policies_from_gradient(
    const Eigen::VectorXd& grad_v, const Eigen::MatrixXd& g, const GameCost& cost) {
  const Eigen::VectorXd gt_grad = g.transpose() * grad_v;
  Eigen::VectorXd u1 = -0.5 * cost.R.ldlt().solve(gt_grad);
  Eigen::VectorXd u2 = gt_grad / (2.0 * cost.gamma * cost.gamma);
  return {std::move(u1), std::move(u2)};
}

double hamiltonian(const Eigen::VectorXd& zeta, const Eigen::VectorXd& grad_v,
                   const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                   const AffineDynamics& dyn, const GameCost& cost) {
  return local_cost(zeta, u1, u2, cost) + grad_v.dot(dyn.f + dyn.g * (u1 + u2));
}

bool GainConditionReport::all_pass() const {
  for (const auto& c : conditions)
    if (!c.pass) return false;
  return true;
}

GainConditionReport check_gain_conditions(const GameCost& cost,
                                          const LearnerGains& gains, double c_lower,
                                          double lf_estimate, double eps_prime_bound,
                                          double epsilon_free) {
  GainConditionReport report;

  const double q_lo = cost.q_lower();
  const double q_rhs = gains.eta_c * lf_estimate * eps_prime_bound * epsilon_free / 2.0;
  report.conditions.push_back({"q_lower_exceeds_critic_coupling", q_lo, q_rhs, q_lo > q_rhs});

  const double c_rhs = lf_estimate * eps_prime_bound / (2.0 * epsilon_free) +
                       (gains.eta_a1 + gains.eta_a2) / (2.0 * gains.eta_c);
  report.conditions.push_back(
      {"c_lower_exceeds_actor_coupling", c_lower, c_rhs, c_lower > c_rhs});

  const double r_min = cost.r_min_eig();
  const double g2 = cost.gamma * cost.gamma;
  report.conditions.push_back({"r_min_eig_at_least_gamma_sq", r_min, g2, r_min >= g2});

  return report;
}

}  // namespace stationkeep
