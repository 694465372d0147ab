#include "stationkeep/learner.hpp"

#include <cmath>
#include <stdexcept>

#include "stationkeep/rng.hpp"

namespace stationkeep {

void Box::validate() const {
  if (lo.size() != hi.size() || lo.size() == 0)
    throw std::invalid_argument("box bounds must be non-empty and equally sized");
  if (!lo.allFinite() || !hi.allFinite())
    throw std::invalid_argument("box bounds must be finite");
  if (((hi - lo).array() < 0.0).any())
    throw std::invalid_argument("box must satisfy lo <= hi");
}

int SampleSet::feature_count() const {
  return points.empty() ? 0 : static_cast<int>(sigma_jac.front().rows());
}

void add_sample_point(SampleSet& samples, const Eigen::VectorXd& zeta,
                      const BasisSet& basis, const DynamicsProvider& dyn) {
  AffineDynamics ad = dyn.affine(zeta);
  samples.points.push_back(zeta);
  samples.sigma_jac.push_back(basis.sigma_jacobian(zeta));
  samples.f.push_back(std::move(ad.f));
  samples.g.push_back(std::move(ad.g));
  samples.omega.emplace_back(Eigen::VectorXd::Zero(basis.size()));
  samples.p.push_back(1.0);
  samples.delta.push_back(0.0);
}

namespace {

std::vector<int> shuffled_indices(int n, DeterministicRng& rng) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.integer(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[i], idx[j]);
  }
  return idx;
}

std::vector<Eigen::VectorXd> grid_points(const Box& box, int n_points) {
  const int dim = box.dim();
  int per_axis = static_cast<int>(
      std::ceil(std::pow(static_cast<double>(n_points), 1.0 / dim) - 1e-9));
  per_axis = std::max(per_axis, 1);

  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n_points);
  std::vector<int> idx(dim, 0);
  while (static_cast<int>(pts.size()) < n_points) {
    Eigen::VectorXd z(dim);
    for (int d = 0; d < dim; ++d)
      z(d) = box.lo(d) + (idx[d] + 0.5) * (box.hi(d) - box.lo(d)) / per_axis;
    pts.push_back(std::move(z));
    // advance the lattice counter
    int d = dim - 1;
    while (d >= 0 && ++idx[d] == per_axis) idx[d--] = 0;
    if (d < 0 && static_cast<int>(pts.size()) < n_points)
      throw std::logic_error("grid lattice exhausted before N points");
  }
  return pts;
}

std::vector<Eigen::VectorXd> latin_hypercube_points(const Box& box, int n_points,
                                                    std::uint64_t seed) {
  const int dim = box.dim();
  DeterministicRng rng(seed);
  std::vector<std::vector<int>> strata(dim);
  for (int d = 0; d < dim; ++d) strata[d] = shuffled_indices(n_points, rng);

  std::vector<Eigen::VectorXd> pts(n_points, Eigen::VectorXd(dim));
  for (int j = 0; j < n_points; ++j)
    for (int d = 0; d < dim; ++d) {
      const double u = (strata[d][j] + rng.uniform()) / n_points;
      pts[j](d) = box.lo(d) + u * (box.hi(d) - box.lo(d));
    }
  return pts;
}

}  // namespace

SampleSet build_sample_set(const Box& domain, int n_points, SampleStrategy strategy,
                           std::uint64_t seed, const BasisSet& basis,
                           const DynamicsProvider& dyn) {
  domain.validate();
  if (domain.dim() != basis.dim() || domain.dim() != dyn.state_dim())
    throw std::invalid_argument("domain dimension must match basis and plant");
  if (n_points < basis.size())
    throw std::invalid_argument("need at least m = " + std::to_string(basis.size()) +
                                " sample points, got " + std::to_string(n_points));

  const auto pts = strategy == SampleStrategy::grid
                       ? grid_points(domain, n_points)
                       : latin_hypercube_points(domain, n_points, seed);

  SampleSet set;
  set.points.reserve(n_points);
  for (const auto& z : pts) add_sample_point(set, z, basis, dyn);
  return set;
}

RankReport rank_check(SampleSet& samples, const WeightSet& weights,
                      const GameCost& cost, Backend backend) {
  refresh_samples(samples, weights, cost, backend);
  const Eigen::MatrixXd gram = sample_gram(samples, backend);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);

  RankReport report;
  report.c_upper = eig.eigenvalues().maxCoeff();
  report.c_lower = std::max(0.0, eig.eigenvalues().minCoeff());
  const double tol = 1e-10 * std::max(report.c_upper, 0.0);
  report.rank = static_cast<int>((eig.eigenvalues().array() > tol).count());
  return report;
}

Eigen::VectorXd critic_derivative(const WeightSet& weights, const BellmanError& live,
                                  const SampleSet& samples, const LearnerGains& gains,
                                  Backend backend) {
  if (live.omega.size() != weights.Wc.size())
    throw std::invalid_argument("regressor/weight dimension mismatch");
  Eigen::VectorXd dot = -gains.eta_c * (live.delta / live.p) * live.omega;
  if (samples.count() > 0) dot -= gains.eta_c * sample_gradient_sum(samples, backend);
  return dot;
}

Eigen::VectorXd actor_derivative(const Eigen::VectorXd& wa, const Eigen::VectorXd& wc,
                                 double eta_a, double w_bar, double kappa_p) {
  if (!(w_bar > 0.0)) throw std::invalid_argument("W_bar must be positive");
  Eigen::VectorXd raw = -eta_a * (wa - wc);

  const double r = wa.norm();
  const double r_inner = (1.0 - kappa_p) * w_bar;
  if (r <= r_inner) return raw;

  const Eigen::VectorXd radial = wa / r;
  const double outward = radial.dot(raw);
  if (outward <= 0.0) return raw;

  // Quadratic ramp: 0 at the inner radius, 1 on the boundary, above 1 outside
  // so that integrator overshoot is pulled back to the ball.
  const double s = (r - r_inner) / (w_bar - r_inner);
  return raw - (s * s) * outward * radial;
}

}  // namespace stationkeep
