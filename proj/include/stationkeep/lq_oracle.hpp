#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "stationkeep/learner.hpp"
#include "stationkeep/value_approx.hpp"
#include "stationkeep/vehicle_model.hpp"

namespace stationkeep {

/// Raised when the Riccati iteration fails to reach the required residual,
/// which signals gamma below the achievable attenuation level (or an
/// unstabilizable plant). Carries the residual history for diagnosis.
class GareNonConvergenceError : public std::runtime_error {
 public:
  GareNonConvergenceError(const std::string& what, std::vector<double> history)
      : std::runtime_error(what), residual_history(std::move(history)) {}

  std::vector<double> residual_history;
};

struct GareSolution {
  Eigen::MatrixXd P;      // symmetric
  double residual = 0.0;  // Frobenius norm of the Riccati residual
  int iterations = 0;
};

/// Solves A'P + PA + Q - P B R^-1 B' P + (1/gamma^2) P B B' P = 0 by
/// Newton/Kleinman iteration, initialized from the pure-LQR solution and
/// continuation-stepped in 1/gamma^2 (10 steps). gamma may be +infinity,
/// which disables the disturbance term and yields the standard LQR Riccati
/// solution.
GareSolution gare_solve(const LinearPlant& plant, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, double gamma);

/// Weights W of the quadratic-monomial basis such that W'sigma(zeta) =
/// zeta'P zeta exactly. Rejects any other basis.
Eigen::VectorXd ideal_weights(const GareSolution& sol, const BasisSet& basis);

struct WeightComparison {
  double wc_rel_err = 0.0;
  double wa1_rel_err = 0.0;
  double wa2_rel_err = 0.0;
  /// max over probe states and both players of ||u_hat(learned) - u_hat(ideal)||
  double max_policy_err = 0.0;
};

/// Diagnostic: the Bellman error written in terms of the weight estimation
/// errors, valid where the basis represents the true value exactly (zero
/// reconstruction error), i.e. on the LQ benchmarks:
///   delta = -(W - Wc)'omega + 1/4 (W - Wa1)'Gs1 (W - Wa1)
///                           - 1/4 (W - Wa2)'Gs2 (W - Wa2),
/// with omega evaluated at the current actor weights. Must agree with the
/// measurable form up to the Riccati solve residual.
double unmeasurable_bellman_error(const Eigen::VectorXd& zeta, const WeightSet& weights,
                                  const Eigen::VectorXd& ideal, const BasisSet& basis,
                                  const AffineDynamics& dyn, const GameCost& cost);

WeightComparison compare_weights(const WeightSet& learned,
                                 const Eigen::VectorXd& ideal, const BasisSet& basis,
                                 const DynamicsProvider& dyn, const GameCost& cost,
                                 int probe_count = 256, double ball_radius = 1.0,
                                 std::uint64_t seed = 20240901);

// Embedded desk-scale benchmarks.
LinearPlant scalar_benchmark();             // a = -1, b = 1
LinearPlant double_integrator_benchmark();  // n = 2, k = 1

/// Linearization of the AUV control-affine drift about zeta = 0 by central
/// differences (step h), paired with the exact input map g(0).
LinearPlant linearized_auv(const VehicleParams& params,
                           double theta_margin = kDefaultThetaMargin,
                           double h = 1e-6);

}  // namespace stationkeep
