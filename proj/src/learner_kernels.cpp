// Per-sample concurrent-learning kernels: a serial reference implementation
// and OpenMP variants. The parallel reductions accumulate into a fixed number
// of blocks and then combine the blocks in order, so the result is independent
// of the thread count (it differs from the serial left-to-right sum only by
// the usual floating-point reordering, which tests bound at ~1e-12 relative).

#include <cmath>
#include <stdexcept>

#include "stationkeep/learner.hpp"

namespace stationkeep {

namespace {

constexpr int kReductionBlocks = 64;

}  // namespace

namespace {

/// Per-thread workspace; the refresh loop is allocation-free on the hot path.
struct RefreshScratch {
  Eigen::VectorXd grad, u1, u2, u_tmp, zdot;

  RefreshScratch(int state_dim, int input_dim) {
    grad.resize(state_dim);
    u1.resize(input_dim);
    u2.resize(input_dim);
    u_tmp.resize(input_dim);
    zdot.resize(state_dim);
  }
};

}  // namespace

void refresh_samples(SampleSet& samples, const WeightSet& weights,
                     const GameCost& cost, Backend backend) {
  const int n = samples.count();
  if (n == 0) return;
  if (weights.Wc.size() != samples.feature_count())
    throw std::invalid_argument("weight/feature dimension mismatch");

  const int state_dim = static_cast<int>(samples.f.front().size());
  const int k = static_cast<int>(samples.g.front().cols());
  const Eigen::MatrixXd r_inv =
      cost.R.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  const double gamma_sq = cost.gamma * cost.gamma;

  auto body = [&](int j, RefreshScratch& s) {
    const Eigen::MatrixXd& jac = samples.sigma_jac[j];
    const Eigen::MatrixXd& g = samples.g[j];

    s.grad.noalias() = jac.transpose() * weights.Wa1;
    s.u_tmp.noalias() = g.transpose() * s.grad;
    s.u1.noalias() = -0.5 * (r_inv * s.u_tmp);
    s.grad.noalias() = jac.transpose() * weights.Wa2;
    s.u2.noalias() = g.transpose() * s.grad;
    s.u2 /= 2.0 * gamma_sq;

    s.zdot = samples.f[j];
    s.u_tmp = s.u1 + s.u2;
    s.zdot.noalias() += g * s.u_tmp;
    samples.omega[j].noalias() = jac * s.zdot;
    samples.p[j] = std::sqrt(1.0 + samples.omega[j].squaredNorm());

    const Eigen::VectorXd& zeta = samples.points[j];
    samples.delta[j] = zeta.dot(cost.Q * zeta) + s.u1.dot(cost.R * s.u1) -
                       gamma_sq * s.u2.squaredNorm() +
                       weights.Wc.dot(samples.omega[j]);
  };

  if (backend == Backend::serial) {
    RefreshScratch scratch(state_dim, k);
    for (int j = 0; j < n; ++j) body(j, scratch);
  } else {
#pragma omp parallel
    {
      RefreshScratch scratch(state_dim, k);
#pragma omp for schedule(static)
      for (int j = 0; j < n; ++j) body(j, scratch);
    }
  }
}

Eigen::VectorXd sample_gradient_sum(const SampleSet& samples, Backend backend) {
  const int n = samples.count();
  const int m = samples.feature_count();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  if (n == 0) return sum;

  if (backend == Backend::serial) {
    for (int j = 0; j < n; ++j)
      sum.noalias() += samples.omega[j] * (samples.delta[j] / samples.p[j]);
    return sum;
  }

  const int blocks = std::min(kReductionBlocks, n);
  Eigen::MatrixXd partial = Eigen::MatrixXd::Zero(m, blocks);
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int begin = static_cast<int>(static_cast<long>(n) * b / blocks);
    const int end = static_cast<int>(static_cast<long>(n) * (b + 1) / blocks);
    for (int j = begin; j < end; ++j)
      partial.col(b).noalias() += samples.omega[j] * (samples.delta[j] / samples.p[j]);
  }
  for (int b = 0; b < blocks; ++b) sum += partial.col(b);
  return sum;
}

Eigen::MatrixXd sample_gram(const SampleSet& samples, Backend backend) {
  const int n = samples.count();
  const int m = samples.feature_count();
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  if (n == 0) return gram;

  if (backend == Backend::serial) {
    for (int j = 0; j < n; ++j)
      gram.noalias() += samples.omega[j] * samples.omega[j].transpose() / samples.p[j];
    return gram;
  }

  const int blocks = std::min(kReductionBlocks, n);
  std::vector<Eigen::MatrixXd> partial(blocks, Eigen::MatrixXd::Zero(m, m));
#pragma omp parallel for schedule(static)
  for (int b = 0; b < blocks; ++b) {
    const int begin = static_cast<int>(static_cast<long>(n) * b / blocks);
    const int end = static_cast<int>(static_cast<long>(n) * (b + 1) / blocks);
    for (int j = begin; j < end; ++j)
      partial[b].noalias() +=
          samples.omega[j] * samples.omega[j].transpose() / samples.p[j];
  }
  for (int b = 0; b < blocks; ++b) gram += partial[b];
  return gram;
}

}  // namespace stationkeep
