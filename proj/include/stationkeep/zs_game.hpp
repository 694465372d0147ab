#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stationkeep/dynamics.hpp"

namespace stationkeep {

// Two-player zero-sum game: the controller u1 minimizes and the disturbance
// u2 maximizes the integral of the local cost below. A unique game value
// requires the minimax and maximin costs to coincide (the Nash condition);
// that is a modeling assumption here, not something this module computes.

/// Weights of the two-player local cost r = zeta'Q zeta + u1'R u1 - gamma^2 u2'u2.
/// Q must be positive definite, R symmetric positive definite, gamma > 0. With
/// `strict_attenuation` the attenuation condition lambda_min(R) >= gamma^2 is enforced
/// at validation time.
struct GameCost {
  Eigen::MatrixXd Q;  // n x n
  Eigen::MatrixXd R;  // k x k
  double gamma = 1.0;

  void validate(bool strict_attenuation = false) const;

  double q_lower() const;  // lambda_min(Q)
  double q_upper() const;  // lambda_max(Q)
  double r_min_eig() const;
};

struct LearnerGains {
  double eta_c = 1.0;
  double eta_a1 = 1.0;
  double eta_a2 = 1.0;

  void validate() const;
};

double local_cost(const Eigen::VectorXd& zeta, const Eigen::VectorXd& u1,
                  const Eigen::VectorXd& u2, const GameCost& cost);

/// Closed-form policies for a given value gradient:
///   u1 = -1/2 R^-1 g' gradV,   u2 = 1/(2 gamma^2) g' gradV.
std::pair<Eigen::VectorXd, Eigen::VectorXd> policies_from_gradient(
    const Eigen::VectorXd& grad_v, const Eigen::MatrixXd& g, const GameCost& cost);

/// H = r(zeta,u1,u2) + gradV'(f + g(u1+u2)).
double hamiltonian(const Eigen::VectorXd& zeta, const Eigen::VectorXd& grad_v,
                   const Eigen::VectorXd& u1, const Eigen::VectorXd& u2,
                   const AffineDynamics& dyn, const GameCost& cost);

/// One inequality of the sufficient-condition set: pass iff lhs > rhs
/// (>= for the attenuation condition).
struct GainCondition {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct GainConditionReport {
  std::vector<GainCondition> conditions;
  bool all_pass() const;
};

/// Evaluates the three sufficient inequalities:
///   q_lower   > eta_c * Lf * eps_prime * eps_free / 2
///   c_lower   > Lf * eps_prime / (2 eps_free) + (eta_a1 + eta_a2) / (2 eta_c)
///   lambda_min(R) >= gamma^2
/// A failed condition is a report entry, never an exception.
GainConditionReport check_gain_conditions(const GameCost& cost,
                                          const LearnerGains& gains, double c_lower,
                                          double lf_estimate, double eps_prime_bound,
                                          double epsilon_free);

}  // namespace stationkeep
