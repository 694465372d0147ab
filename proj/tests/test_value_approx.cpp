#include <doctest.h>

#include "stationkeep/lq_oracle.hpp"
#include "stationkeep/value_approx.hpp"
#include "support/oracles.hpp"

using namespace stationkeep;

namespace {

struct LqFixture {
  LinearPlant plant = double_integrator_benchmark();
  GameCost cost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1),
                std::sqrt(2.0)};
  LinearDynamics dyn{double_integrator_benchmark()};
  QuadraticBasis basis{2};
  GareSolution sol = gare_solve(plant, cost.Q, cost.R, cost.gamma);
  Eigen::VectorXd ideal = ideal_weights(sol, basis);

  WeightSet ideal_set() const {
    WeightSet w;
    w.Wc = w.Wa1 = w.Wa2 = ideal;
    w.W_bar = 10.0;
    return w;
  }
};

}  // namespace

TEST_CASE("quadratic basis: sigma(0) = 0, selector weights, monomial order") {
  const QuadraticBasis basis(3);
  CHECK(basis.size() == 6);
  CHECK(basis.sigma(Eigen::VectorXd::Zero(3)).norm() == 0.0);

  Eigen::VectorXd z(3);
  z << 2.0, -1.0, 3.0;
  const Eigen::VectorXd s = basis.sigma(z);
  // order: z0^2, z0z1, z0z2, z1^2, z1z2, z2^2
  Eigen::VectorXd expect(6);
  expect << 4.0, -2.0, 6.0, 1.0, -3.0, 9.0;
  CHECK((s - expect).norm() == 0.0);

  CHECK(basis.monomial_index(0, 0) == 0);
  CHECK(basis.monomial_index(1, 2) == 4);
  CHECK(basis.monomial_index(2, 2) == 5);
  CHECK_THROWS_AS(basis.monomial_index(2, 1), std::out_of_range);

  // Wc = e_k selects sigma_k
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd wc = Eigen::VectorXd::Zero(6);
    wc(k) = 1.0;
    CHECK(value_estimate(wc, z, basis) == s(k));
  }
}

TEST_CASE("sigma_jacobian matches central finite differences") {
  const QuadraticBasis basis(12);
  DeterministicRng rng(301);
  const double h = 1e-6;
  double worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    Eigen::VectorXd z(12);
    for (int d = 0; d < 12; ++d) z(d) = rng.uniform(-2.0, 2.0);
    const Eigen::MatrixXd jac = basis.sigma_jacobian(z);
    Eigen::MatrixXd fd(basis.size(), 12);
    for (int d = 0; d < 12; ++d) {
      Eigen::VectorXd zp = z, zm = z;
      zp(d) += h;
      zm(d) -= h;
      fd.col(d) = (basis.sigma(zp) - basis.sigma(zm)) / (2.0 * h);
    }
    worst = std::max(worst, (fd - jac).norm() / std::max(1.0, jac.norm()));
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("make_basis registry") {
  CHECK(make_basis("quadratic", 12)->size() == 78);
  CHECK_THROWS_AS(make_basis("cubic-splines", 12), std::invalid_argument);
}

TEST_CASE("value_estimate reproduces the oracle value with ideal weights") {
  const LqFixture fx;
  DeterministicRng rng(302);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd z = random_ball_point(rng, 2, 2.0);
    CHECK(value_estimate(fx.ideal, z, fx.basis) ==
          doctest::Approx(z.dot(fx.sol.P * z)).epsilon(1e-10));
  }
  CHECK(value_estimate(fx.ideal, Eigen::VectorXd::Zero(2), fx.basis) == 0.0);
}

TEST_CASE("policy_hat: zero weights, player symmetry, oracle match") {
  const LqFixture fx;
  DeterministicRng rng(303);

  const Eigen::VectorXd z = random_ball_point(rng, 2, 1.0);
  const AffineDynamics ad = fx.dyn.affine(z);

  CHECK(policy_hat(Eigen::VectorXd::Zero(3), z, fx.basis, ad, fx.cost, Player::one)
            .norm() == 0.0);

  // gamma = 1, R = I, Wa2 = Wa1  ->  u2_hat = -u1_hat
  GameCost sym = fx.cost;
  sym.gamma = 1.0;
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd w = random_ball_point(rng, 3, 2.0);
    const Eigen::VectorXd zz = random_ball_point(rng, 2, 2.0);
    const AffineDynamics a = fx.dyn.affine(zz);
    const Eigen::VectorXd u1 = policy_hat(w, zz, fx.basis, a, sym, Player::one);
    const Eigen::VectorXd u2 = policy_hat(w, zz, fx.basis, a, sym, Player::two);
    CHECK((u1 + u2).norm() <= 1e-14);
  }

  // ideal weights reproduce policies_from_gradient on gradV = sigma'' W
  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd zz = random_ball_point(rng, 2, 2.0);
    const AffineDynamics a = fx.dyn.affine(zz);
    const Eigen::VectorXd grad = fx.basis.sigma_jacobian(zz).transpose() * fx.ideal;
    const auto [u1o, u2o] = policies_from_gradient(grad, a.g, fx.cost);
    CHECK((policy_hat(fx.ideal, zz, fx.basis, a, fx.cost, Player::one) - u1o).norm() <=
          1e-10);
    CHECK((policy_hat(fx.ideal, zz, fx.basis, a, fx.cost, Player::two) - u2o).norm() <=
          1e-10);
  }
}

TEST_CASE("regressor: equilibrium, normalization bound, composition oracle") {
  const AuvDynamics auv(VehicleParams::generic());
  const QuadraticBasis basis12(12);
  const GameCost cost{Eigen::MatrixXd::Identity(12, 12),
                      Eigen::MatrixXd::Identity(6, 6), 1.0};

  // zeta = 0 with a neutrally buoyant vehicle: omega = 0, p = 1
  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(12);
  const Regressor r0 = regressor(z0, Eigen::VectorXd::Zero(6), Eigen::VectorXd::Zero(6),
                                 basis12, auv.affine(z0));
  CHECK(r0.omega.norm() == 0.0);
  CHECK(r0.p == 1.0);

  const LqFixture fx;
  DeterministicRng rng(304);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd z = random_ball_point(rng, 2, 3.0);
    const AffineDynamics ad = fx.dyn.affine(z);
    const Eigen::VectorXd u1 = random_ball_point(rng, 1, 2.0);
    const Eigen::VectorXd u2 = random_ball_point(rng, 1, 2.0);
    const Regressor r = regressor(z, u1, u2, fx.basis, ad);

    CHECK(r.omega.norm() / r.p < 1.0);
    CHECK(r.p >= 1.0);

    // independent composition: sigma' * zeta_dot with zeta_dot assembled here
    const Eigen::VectorXd zdot = fx.plant.A * z + fx.plant.B * (u1 + u2);
    CHECK((r.omega - fx.basis.sigma_jacobian(z) * zdot).norm() <= 1e-10);
  }
}

TEST_CASE("bellman_error: zero state, ideal weights, affinity in Wc") {
  const LqFixture fx;

  // zeta = 0: r(0,0,0) = 0 and omega = 0, so delta = 0 for any weights
  WeightSet weird = fx.ideal_set();
  weird.Wc = 3.7 * weird.Wc;
  const Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2);
  CHECK(bellman_error(z0, weird, fx.basis, fx.dyn.affine(z0), fx.cost).delta == 0.0);

  // ideal weights annihilate the Bellman error on the exact-basis benchmark
  const WeightSet ideal = fx.ideal_set();
  DeterministicRng rng(305);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd z = random_ball_point(rng, 2, 1.0);
    CHECK(std::abs(bellman_error(z, ideal, fx.basis, fx.dyn.affine(z), fx.cost).delta) <=
          1e-8);
  }

  // perturbing Wc by d*e_k moves delta by exactly d*omega_k
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd z = random_ball_point(rng, 2, 1.5);
    const AffineDynamics ad = fx.dyn.affine(z);
    const BellmanError base = bellman_error(z, ideal, fx.basis, ad, fx.cost);
    for (int k = 0; k < 3; ++k) {
      const double d = rng.uniform(-2.0, 2.0);
      WeightSet moved = ideal;
      moved.Wc(k) += d;
      const BellmanError shifted = bellman_error(z, moved, fx.basis, ad, fx.cost);
      CHECK(shifted.delta - base.delta == doctest::Approx(d * base.omega(k)).epsilon(1e-12));
      CHECK((shifted.omega - base.omega).norm() == 0.0);  // omega independent of Wc
    }
  }
}

TEST_CASE("g_matrices: definition collapse, PSD, naive product oracle") {
  const LqFixture fx;
  DeterministicRng rng(306);

  // R = I, gamma = 1 -> G1 = G2 = g g'
  GameCost collapse = fx.cost;
  collapse.gamma = 1.0;
  const Eigen::VectorXd z = random_ball_point(rng, 2, 1.0);
  const AffineDynamics ad = fx.dyn.affine(z);
  const GMatrices gm0 = g_matrices(z, fx.basis, ad, collapse);
  CHECK((gm0.G1 - gm0.G2).norm() <= 1e-14);
  CHECK((gm0.G1 - ad.g * ad.g.transpose()).norm() <= 1e-14);

  for (int i = 0; i < 100; ++i) {
    const Eigen::VectorXd zz = random_ball_point(rng, 2, 2.0);
    const AffineDynamics a = fx.dyn.affine(zz);
    const GMatrices gm = g_matrices(zz, fx.basis, a, fx.cost);

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gm.Gs1);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(gm.Gs2);
    CHECK(eig2.eigenvalues().minCoeff() >= -1e-10);

    // naive triple product, scalar loops
    const Eigen::MatrixXd jac = fx.basis.sigma_jacobian(zz);
    Eigen::MatrixXd naive = Eigen::MatrixXd::Zero(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        for (int a1 = 0; a1 < 2; ++a1)
          for (int a2 = 0; a2 < 2; ++a2)
            naive(r, c) += jac(r, a1) * gm.G1(a1, a2) * jac(c, a2);
    CHECK((gm.Gs1 - naive).norm() <= 1e-12 * (1.0 + naive.norm()));
  }
}
