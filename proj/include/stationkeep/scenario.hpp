#pragma once

#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "stationkeep/learner.hpp"
#include "stationkeep/vehicle_model.hpp"
#include "stationkeep/zs_game.hpp"

namespace stationkeep {

/// The true tau_d of the plant equation, unknown to the controller. For the
/// AUV it is a body-fixed force/moment and is mapped through J^-T before it
/// enters the input channel; for linear plants it is applied directly.
struct DisturbanceModel {
  enum class Kind { none, constant_current, sinusoidal };

  Kind kind = Kind::none;
  Eigen::VectorXd amplitude;  // N / N*m per input channel
  double frequency = 0.0;     // rad/s
  double phase = 0.0;         // rad

  Eigen::VectorXd eval(double t) const;
  void validate(int input_dim) const;
};

struct InitialWeights {
  enum class Kind { zero, uniform_random, explicit_values, pd_quadratic };

  Kind kind = Kind::uniform_random;
  double scale = 0.1;  // uniform-random half-width
  // pd-quadratic: diagonal of P0 (n values) and the zeta_i*zeta_{i+n/2}
  // couplings (n/2 values); scalars broadcast.
  Eigen::VectorXd pd_diag;
  Eigen::VectorXd pd_cross;
  std::optional<Eigen::VectorXd> wc, wa1, wa2;
};

struct SampleSpec {
  int count = 0;
  SampleStrategy strategy = SampleStrategy::latin_hypercube;
  std::uint64_t seed = 0;
  Box box;
  int refresh_cadence = 1;  // steps between sample refreshes (1 = every stage)
  int rank_cadence = 100;   // steps between rank-report snapshots
};

struct Scenario {
  enum class PlantKind { auv, linear };

  std::string name = "scenario";
  PlantKind plant_kind = PlantKind::linear;
  std::optional<VehicleParams> vehicle;
  double theta_margin = kDefaultThetaMargin;
  std::optional<LinearPlant> plant;

  Eigen::VectorXd initial_state;
  double duration = 1.0;
  double dt = 0.005;
  GameCost cost;
  LearnerGains gains;
  std::string basis_name = "quadratic";
  SampleSpec samples;
  DisturbanceModel disturbance;
  InitialWeights initial_weights;
  double w_bar = 10.0;
  std::uint64_t seed = 0;
  double divergence_bound = 1e3;
  std::optional<double> ultimate_bound;
  Backend backend = Backend::parallel;
  bool strict_attenuation = false;
  double eps_prime_bound = 0.0;  // reconstruction-gradient bound fed to the checker
  double epsilon_free = 1.0;     // free parameter of the sufficient conditions

  int state_dim() const;
  int input_dim() const;
  std::unique_ptr<DynamicsProvider> make_dynamics() const;
  std::unique_ptr<BasisSet> make_basis_set() const;
  WeightSet make_initial_weights(const BasisSet& basis) const;
  void validate() const;

  /// `base_dir` resolves relative vehicle-file references.
  static Scenario from_json(const nlohmann::json& j, const std::string& base_dir = ".");
  static Scenario load(const std::string& path);
};

}  // namespace stationkeep
