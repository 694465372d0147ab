#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace stationkeep {

/// mt19937_64 with hand-mapped draws. The engine sequence is pinned by the
/// standard, and avoiding std distributions keeps draws bit-stable across
/// standard libraries.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, bound).
  std::uint64_t integer(std::uint64_t bound) { return gen_() % bound; }

 private:
  std::mt19937_64 gen_;
};

/// Standard normal via Box-Muller on hand-mapped uniforms.
inline double normal_draw(DeterministicRng& rng) {
  double u1 = rng.uniform();
  while (u1 <= 0.0) u1 = rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform point in the ball of given radius (gaussian direction, radial cdf).
inline Eigen::VectorXd random_ball_point(DeterministicRng& rng, int dim,
                                         double radius) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v(i) = normal_draw(rng);
  const double norm = v.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(dim);
  const double r = radius * std::pow(rng.uniform(), 1.0 / dim);
  return v * (r / norm);
}

}  // namespace stationkeep
