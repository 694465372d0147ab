#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stationkeep/lq_oracle.hpp"
#include "stationkeep/scenario.hpp"

namespace stationkeep {

enum class RunStatus { completed, diverged };

struct LogRow {
  double t = 0.0;
  Eigen::VectorXd zeta;
  Eigen::VectorXd u1;      // applied control
  Eigen::VectorXd u2_hat;  // learner's worst-case disturbance estimate
  Eigen::VectorXd tau_d;   // true disturbance
  double delta = 0.0;
  double norm_wc = 0.0, norm_wa1 = 0.0, norm_wa2 = 0.0;
  int rank = 0;
  double c_lower = 0.0, c_upper = 0.0;
};

struct TrajectoryLog {
  int state_dim = 0;
  int input_dim = 0;
  std::vector<LogRow> rows;
  RunStatus status = RunStatus::completed;
  double divergence_time = 0.0;
  std::string divergence_reason;
  WeightSet final_weights;
  std::vector<std::string> warnings;

  std::vector<std::string> csv_header() const;
  void write_csv(std::ostream& out) const;
};

struct RunMetrics {
  double max_state_norm = 0.0;
  double final_state_norm = 0.0;
  double ultimate_bound_estimate = 0.0;  // max ||zeta|| over the last 20% of the run
  double control_energy = 0.0;           // trapezoidal integral of u1'R u1
  double max_abs_delta = 0.0;
  double final_abs_delta = 0.0;
  std::optional<WeightComparison> weight_errors;
};

/// Closed-loop integration of the coupled plant + learner ODEs. The true
/// disturbance drives the plant; the learner's u2_hat only shapes learning.
class SimEngine {
 public:
  explicit SimEngine(const Scenario& scenario);

  /// One fixed-step RK4 update of the augmented state [zeta; Wc; Wa1; Wa2].
  /// With `refresh_in_stages` the sample-point quantities are recomputed at
  /// every stage evaluation (the fully coupled ODE); otherwise the
  /// concurrent-learning sum is held at its value from the last refresh.
  void step(Eigen::VectorXd& zeta, WeightSet& weights, SampleSet& samples, double t,
            double dt, bool refresh_in_stages = true) const;

  TrajectoryLog run() const;

  const Scenario& scenario() const { return scenario_; }
  const DynamicsProvider& dynamics() const { return *dynamics_; }
  const BasisSet& basis() const { return *basis_; }
  SampleSet build_samples() const;
  WeightSet initial_weights() const { return scenario_.make_initial_weights(*basis_); }

  /// Disturbance as seen by the input channel at state zeta (J^-T tau_d for
  /// the AUV plant, tau_d directly for linear plants).
  Eigen::VectorXd applied_disturbance(double t, const Eigen::VectorXd& zeta) const;

 private:
  Eigen::VectorXd augmented_derivative(const Eigen::VectorXd& x, double t,
                                       SampleSet& samples, bool refresh,
                                       const Eigen::VectorXd& frozen_sum) const;

  Scenario scenario_;
  std::unique_ptr<DynamicsProvider> dynamics_;
  std::unique_ptr<BasisSet> basis_;
};

RunMetrics metrics(const TrajectoryLog& log, const GameCost& cost,
                   const WeightComparison* oracle_comparison = nullptr);

}  // namespace stationkeep
