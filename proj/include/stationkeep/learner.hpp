#pragma once

#include <cstdint>
#include <vector>

#include "stationkeep/value_approx.hpp"

namespace stationkeep {

/// Which implementation evaluates the per-sample map and reductions. Both
/// produce the same values (the parallel reductions use a fixed block
/// decomposition, so results do not depend on the thread count); `serial` is
/// the reference kept for testing.
enum class Backend { serial, parallel };

enum class SampleStrategy { grid, latin_hypercube };

/// Axis-aligned compact set in R^n.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  void validate() const;
  int dim() const { return static_cast<int>(lo.size()); }
};

/// Sampled state points with weight-independent caches (sigma'_j, f_j, g_j)
/// filled at build time and per-update quantities (omega_j, p_j, delta_j)
/// filled by refresh_samples.
struct SampleSet {
  std::vector<Eigen::VectorXd> points;
  std::vector<Eigen::MatrixXd> sigma_jac;  // m x n each
  std::vector<Eigen::VectorXd> f;
  std::vector<Eigen::MatrixXd> g;

  std::vector<Eigen::VectorXd> omega;
  std::vector<double> p;
  std::vector<double> delta;

  int count() const { return static_cast<int>(points.size()); }
  int feature_count() const;
};

struct RankReport {
  int rank = 0;
  double c_lower = 0.0;  // lambda_min of the normalized Gram sum
  double c_upper = 0.0;  // lambda_max
};

/// Deterministic sample placement over `domain`. Rejects N < m (the feature
/// count): the Gram sum cannot reach full rank with fewer points.
SampleSet build_sample_set(const Box& domain, int n_points, SampleStrategy strategy,
                           std::uint64_t seed, const BasisSet& basis,
                           const DynamicsProvider& dyn);

/// Appends one point (cache-filled) to an existing set.
void add_sample_point(SampleSet& samples, const Eigen::VectorXd& zeta,
                      const BasisSet& basis, const DynamicsProvider& dyn);

/// Recomputes omega_j, p_j, delta_j at the current weights from the cached
/// sigma'_j, f_j, g_j.
void refresh_samples(SampleSet& samples, const WeightSet& weights,
                     const GameCost& cost, Backend backend = Backend::serial);

/// sum_j omega_j * delta_j / p_j over freshly refreshed samples.
Eigen::VectorXd sample_gradient_sum(const SampleSet& samples,
                                    Backend backend = Backend::serial);

/// sum_j omega_j omega_j' / p_j.
Eigen::MatrixXd sample_gram(const SampleSet& samples,
                            Backend backend = Backend::serial);

/// Refreshes the set at the current weights, then eigendecomposes the
/// normalized Gram sum. Eigenvalues below 1e-10 * lambda_max count as zero.
/// rank < m is a report outcome, not an error.
RankReport rank_check(SampleSet& samples, const WeightSet& weights,
                      const GameCost& cost, Backend backend = Backend::serial);

/// Concurrent-learning gradient descent on the Bellman error:
///   Wc_dot = -eta_c (omega/p) delta - eta_c sum_j (omega_j/p_j) delta_j.
/// `live` must be evaluated at the current weights, and `samples` freshly
/// refreshed at them.
Eigen::VectorXd critic_derivative(const WeightSet& weights, const BellmanError& live,
                                  const SampleSet& samples, const LearnerGains& gains,
                                  Backend backend = Backend::serial);

inline constexpr double kDefaultProjectionLayer = 0.05;

/// Smooth ball projection of the raw actor update -eta_a (Wa - Wc): identity
/// inside radius (1 - kappa_p) W_bar, smoothly scaled removal of the outward
/// radial component across the boundary layer, full removal at ||Wa|| >= W_bar.
Eigen::VectorXd actor_derivative(const Eigen::VectorXd& wa, const Eigen::VectorXd& wc,
                                 double eta_a, double w_bar,
                                 double kappa_p = kDefaultProjectionLayer);

}  // namespace stationkeep
