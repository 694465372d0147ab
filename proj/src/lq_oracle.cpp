#include "stationkeep/lq_oracle.hpp"

#include <cmath>
#include <limits>

#include "stationkeep/rng.hpp"

namespace stationkeep {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Solves A'X + XA = -C for symmetric C via Kronecker vectorization.
/// Adequate for the desk-scale dimensions used here (n <= 12).
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& c) {
  const Eigen::Index n = a.rows();
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd at = a.transpose();
  const Eigen::MatrixXd lhs = kron(eye, at) + kron(at, eye);
  const Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(c.data(), n * n);
  const Eigen::VectorXd vx = lhs.partialPivLu().solve(rhs);
  Eigen::MatrixXd x = Eigen::Map<const Eigen::MatrixXd>(vx.data(), n, n);
  return 0.5 * (x + x.transpose());
}

/// Stabilizing initial gain (Bass): with beta exceeding the spectral abscissa
/// of A, solve (A + beta I) Z + Z (A + beta I)' = 2 B B'; K = B' Z^-1 then
/// renders A - B K Hurwitz when (A, B) is controllable.
Eigen::MatrixXd stabilizing_gain(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double beta = 1.0 + a.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::MatrixXd shifted = a + beta * Eigen::MatrixXd::Identity(a.rows(), a.rows());
  const Eigen::MatrixXd z =
      solve_lyapunov(shifted.transpose(), -2.0 * b * b.transpose());
  const auto lu = z.partialPivLu();
  if (std::abs(lu.determinant()) < 1e-300)
    throw GareNonConvergenceError("plant appears unstabilizable (singular Gramian)", {});
  return b.transpose() * lu.solve(Eigen::MatrixXd::Identity(a.rows(), a.rows()));
}

double riccati_residual_norm(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                             const Eigen::MatrixXd& s, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd res = a.transpose() * p + p * a + q - p * s * p;
  return res.norm();
}

/// Newton/Kleinman sweep at fixed S: P_{k+1} solves the Lyapunov equation of
/// the closed loop A - S P_k. Appends residuals to `history`.
Eigen::MatrixXd newton_sweep(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                             const Eigen::MatrixXd& s, Eigen::MatrixXd p,
                             std::vector<double>& history, int& iterations,
                             int max_iter = 100, double tol = 1e-12) {
  double best = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    const double res = riccati_residual_norm(a, q, s, p);
    history.push_back(res);
    if (res <= tol) break;
    if (it > 2 && res >= best) break;  // stagnated at roundoff level
    best = std::min(best, res);

    const Eigen::MatrixXd a_cl = a - s * p;
    Eigen::MatrixXd next = solve_lyapunov(a_cl, q + p * s * p);
    if (!next.allFinite()) break;
    p = std::move(next);
    ++iterations;
  }
  return p;
}

}  // namespace

GareSolution gare_solve(const LinearPlant& plant, const Eigen::MatrixXd& Q,
                        const Eigen::MatrixXd& R, double gamma) {
  const int n = plant.n();
  if (Q.rows() != n || Q.cols() != n)
    throw std::invalid_argument("Q dimension mismatch");
  if (R.rows() != plant.k() || R.cols() != plant.k())
    throw std::invalid_argument("R dimension mismatch");
  if (!(gamma > 0.0)) throw std::invalid_argument("gamma must be positive");

  const Eigen::MatrixXd& a = plant.A;
  const Eigen::MatrixXd& b = plant.B;
  const Eigen::MatrixXd s_lqr =
      b * R.ldlt().solve(Eigen::MatrixXd(b.transpose()));
  const Eigen::MatrixXd s_dist = b * b.transpose();

  std::vector<double> history;
  int iterations = 0;

  // Pure-LQR stage: one Kleinman step from a stabilizing gain, then Newton.
  const Eigen::MatrixXd k0 = stabilizing_gain(a, b);
  const Eigen::MatrixXd a0 = a - b * k0;
  Eigen::MatrixXd p = solve_lyapunov(a0, Q + k0.transpose() * R * k0);
  p = newton_sweep(a, Q, s_lqr, p, history, iterations);

  // Continuation in 1/gamma^2 toward the game equation.
  const double mu_target = std::isinf(gamma) ? 0.0 : 1.0 / (gamma * gamma);
  if (mu_target > 0.0) {
    constexpr int kContinuationSteps = 10;
    for (int step = 1; step <= kContinuationSteps; ++step) {
      const double mu = mu_target * step / kContinuationSteps;
      const Eigen::MatrixXd s = s_lqr - mu * s_dist;
      p = newton_sweep(a, Q, s, p, history, iterations);
    }
  }

  GareSolution sol;
  sol.P = 0.5 * (p + p.transpose());
  const Eigen::MatrixXd s_final = s_lqr - mu_target * s_dist;
  sol.residual = riccati_residual_norm(a, Q, s_final, sol.P);
  sol.iterations = iterations;
  if (!sol.P.allFinite() || sol.residual > 1e-10)
    throw GareNonConvergenceError(
        "game Riccati iteration did not converge (residual " +
            std::to_string(sol.residual) +
            "); gamma is likely below the achievable attenuation level",
        history);
  return sol;
}

Eigen::VectorXd ideal_weights(const GareSolution& sol, const BasisSet& basis) {
  const auto* quad = dynamic_cast<const QuadraticBasis*>(&basis);
  if (quad == nullptr)
    throw std::invalid_argument("ideal weights require the quadratic-monomial basis");
  const int n = quad->dim();
  if (sol.P.rows() != n)
    throw std::invalid_argument("basis dimension does not match P");

  const Eigen::MatrixXd p_sym = 0.5 * (sol.P + sol.P.transpose());
  Eigen::VectorXd w(quad->size());
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j)
      w(quad->monomial_index(i, j)) = (i == j) ? p_sym(i, i) : 2.0 * p_sym(i, j);
  return w;
}

WeightComparison compare_weights(const WeightSet& learned,
                                 const Eigen::VectorXd& ideal, const BasisSet& basis,
                                 const DynamicsProvider& dyn, const GameCost& cost,
                                 int probe_count, double ball_radius,
                                 std::uint64_t seed) {
  if (ideal.size() != basis.size() || learned.Wc.size() != ideal.size())
    throw std::invalid_argument("weight dimension mismatch");

  WeightComparison cmp;
  const double scale = std::max(ideal.norm(), 1e-300);
  cmp.wc_rel_err = (learned.Wc - ideal).norm() / scale;
  cmp.wa1_rel_err = (learned.Wa1 - ideal).norm() / scale;
  cmp.wa2_rel_err = (learned.Wa2 - ideal).norm() / scale;

  DeterministicRng rng(seed);
  for (int i = 0; i < probe_count; ++i) {
    const Eigen::VectorXd zeta = random_ball_point(rng, basis.dim(), ball_radius);
    const AffineDynamics ad = dyn.affine(zeta);
    const Eigen::VectorXd du1 =
        policy_hat(learned.Wa1, zeta, basis, ad, cost, Player::one) -
        policy_hat(ideal, zeta, basis, ad, cost, Player::one);
    const Eigen::VectorXd du2 =
        policy_hat(learned.Wa2, zeta, basis, ad, cost, Player::two) -
        policy_hat(ideal, zeta, basis, ad, cost, Player::two);
    cmp.max_policy_err = std::max({cmp.max_policy_err, du1.norm(), du2.norm()});
  }
  return cmp;
}

double unmeasurable_bellman_error(const Eigen::VectorXd& zeta, const WeightSet& weights,
                                  const Eigen::VectorXd& ideal, const BasisSet& basis,
                                  const AffineDynamics& dyn, const GameCost& cost) {
  const Eigen::VectorXd u1 = policy_hat(weights.Wa1, zeta, basis, dyn, cost, Player::one);
  const Eigen::VectorXd u2 = policy_hat(weights.Wa2, zeta, basis, dyn, cost, Player::two);
  const Regressor reg = regressor(zeta, u1, u2, basis, dyn);
  const GMatrices gm = g_matrices(zeta, basis, dyn, cost);

  const Eigen::VectorXd ec = ideal - weights.Wc;
  const Eigen::VectorXd e1 = ideal - weights.Wa1;
  const Eigen::VectorXd e2 = ideal - weights.Wa2;
  return -ec.dot(reg.omega) + 0.25 * e1.dot(gm.Gs1 * e1) - 0.25 * e2.dot(gm.Gs2 * e2);
}

LinearPlant scalar_benchmark() {
  LinearPlant p;
  p.A = Eigen::MatrixXd::Constant(1, 1, -1.0);
  p.B = Eigen::MatrixXd::Constant(1, 1, 1.0);
  return p;
}

LinearPlant double_integrator_benchmark() {
  LinearPlant p;
  p.A.setZero(2, 2);
  p.A(0, 1) = 1.0;
  p.B.setZero(2, 1);
  p.B(1, 0) = 1.0;
  return p;
}

LinearPlant linearized_auv(const VehicleParams& params, double theta_margin, double h) {
  const AuvDynamics dyn(params, theta_margin);
  LinearPlant plant;
  plant.A.setZero(12, 12);
  for (int j = 0; j < 12; ++j) {
    Eigen::VectorXd plus = Eigen::VectorXd::Zero(12);
    Eigen::VectorXd minus = Eigen::VectorXd::Zero(12);
    plus(j) = h;
    minus(j) = -h;
    plant.A.col(j) = (dyn.affine(plus).f - dyn.affine(minus).f) / (2.0 * h);
  }
  plant.B = dyn.affine(Eigen::VectorXd::Zero(12)).g;
  return plant;
}

}  // namespace stationkeep
