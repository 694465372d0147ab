#include <doctest.h>

#include <sstream>

#include "stationkeep/sim_engine.hpp"
#include "support/oracles.hpp"

using namespace stationkeep;

namespace {

/// Double-integrator learning scenario assembled in code.
Scenario di_scenario() {
  Scenario sc;
  sc.name = "di-test";
  sc.plant_kind = Scenario::PlantKind::linear;
  sc.plant = double_integrator_benchmark();
  sc.initial_state.resize(2);
  sc.initial_state << 0.8, -0.4;
  sc.duration = 1.0;
  sc.dt = 0.005;
  sc.cost = GameCost{Eigen::MatrixXd::Identity(2, 2),
                     0.2 * Eigen::MatrixXd::Identity(1, 1), std::sqrt(2.0)};
  sc.gains = LearnerGains{1.0, 0.5, 0.5};
  sc.samples.count = 12;
  sc.samples.strategy = SampleStrategy::latin_hypercube;
  sc.samples.seed = 7;
  sc.samples.box.lo = Eigen::VectorXd::Constant(2, -2.0);
  sc.samples.box.hi = Eigen::VectorXd::Constant(2, 2.0);
  sc.samples.rank_cadence = 50;
  sc.disturbance.kind = DisturbanceModel::Kind::none;
  sc.disturbance.amplitude = Eigen::VectorXd::Zero(1);
  sc.initial_weights.kind = InitialWeights::Kind::explicit_values;
  Eigen::VectorXd w0(3);
  w0 << 1.0, 0.6, 1.0;
  sc.initial_weights.wc = sc.initial_weights.wa1 = sc.initial_weights.wa2 = w0;
  sc.w_bar = 10.0;
  sc.seed = 1;
  sc.backend = Backend::serial;
  return sc;
}

Scenario auv_scenario() {
  Scenario sc;
  sc.name = "auv-test";
  sc.plant_kind = Scenario::PlantKind::auv;
  sc.vehicle = VehicleParams::generic();
  sc.initial_state = Eigen::VectorXd::Zero(12);
  sc.duration = 1.0;
  sc.dt = 0.005;
  Eigen::VectorXd qd(12);
  qd << 1, 1, 1, 1, 1, 1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1;
  sc.cost = GameCost{qd.asDiagonal(), 0.01 * Eigen::MatrixXd::Identity(6, 6),
                     std::sqrt(0.1)};
  sc.gains = LearnerGains{0.5, 0.2, 0.2};
  sc.samples.count = 78;
  sc.samples.strategy = SampleStrategy::latin_hypercube;
  sc.samples.seed = 11;
  sc.samples.box.lo = Eigen::VectorXd::Constant(12, -0.5);
  sc.samples.box.hi = Eigen::VectorXd::Constant(12, 0.5);
  sc.samples.rank_cadence = 100;
  sc.disturbance.kind = DisturbanceModel::Kind::none;
  sc.disturbance.amplitude = Eigen::VectorXd::Zero(6);
  sc.initial_weights.kind = InitialWeights::Kind::zero;
  sc.w_bar = 60.0;
  sc.seed = 4;
  sc.backend = Backend::serial;
  return sc;
}

}  // namespace

TEST_CASE("zero equilibrium stays exactly zero") {
  Scenario sc = auv_scenario();
  sc.duration = 0.5;
  const SimEngine engine(sc);
  const TrajectoryLog log = engine.run();
  REQUIRE(log.status == RunStatus::completed);
  for (const auto& row : log.rows) CHECK(row.zeta.norm() == 0.0);
}

TEST_CASE("run produces an inclusive uniform grid") {
  Scenario sc = di_scenario();
  sc.duration = 0.1;
  sc.dt = 0.01;
  const TrajectoryLog log = SimEngine(sc).run();
  REQUIRE(log.rows.size() == 11);
  for (std::size_t i = 0; i < log.rows.size(); ++i)
    CHECK(log.rows[i].t == doctest::Approx(0.01 * i).epsilon(1e-12));
}

TEST_CASE("identical scenarios produce bit-identical logs") {
  const Scenario sc = di_scenario();
  const TrajectoryLog a = SimEngine(sc).run();
  const TrajectoryLog b = SimEngine(sc).run();

  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK((a.rows[i].zeta - b.rows[i].zeta).norm() == 0.0);
    CHECK(a.rows[i].delta == b.rows[i].delta);
    CHECK(a.rows[i].norm_wc == b.rows[i].norm_wc);
  }
  CHECK((a.final_weights.Wc - b.final_weights.Wc).norm() == 0.0);

  std::ostringstream csv_a, csv_b;
  a.write_csv(csv_a);
  b.write_csv(csv_b);
  CHECK(csv_a.str() == csv_b.str());
}

TEST_CASE("parallel backend is reproducible run-to-run") {
  Scenario sc = di_scenario();
  sc.backend = Backend::parallel;
  const TrajectoryLog a = SimEngine(sc).run();
  const TrajectoryLog b = SimEngine(sc).run();
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK((a.final_weights.Wc - b.final_weights.Wc).norm() == 0.0);
  CHECK((a.rows.back().zeta - b.rows.back().zeta).norm() == 0.0);
}

TEST_CASE("RK4 integrator exhibits fourth-order endpoint convergence") {
  // Richardson check: e(dt)/e(dt/2) with a dt/4 reference should be ~16-17.
  // Gains are kept small so the base step is inside the asymptotic regime of
  // the critic's fastest mode.
  Scenario sc = di_scenario();
  sc.duration = 1.0;
  sc.gains = LearnerGains{0.25, 0.125, 0.125};

  const auto endpoint = [&](double dt) {
    Scenario s = sc;
    s.dt = dt;
    const TrajectoryLog log = SimEngine(s).run();
    REQUIRE(log.status == RunStatus::completed);
    Eigen::VectorXd x(2 + 3 * 3);
    x << log.rows.back().zeta, log.final_weights.Wc, log.final_weights.Wa1,
        log.final_weights.Wa2;
    return x;
  };

  const Eigen::VectorXd ref = endpoint(0.0025);
  const double e1 = (endpoint(0.01) - ref).norm();
  const double e2 = (endpoint(0.005) - ref).norm();
  const double ratio = e1 / e2;
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("frozen learner reduces to the plant, matching a body-frame integration") {
  Scenario sc = auv_scenario();
  sc.gains = LearnerGains{0.0, 0.0, 0.0};
  sc.initial_state << 0.3, -0.2, 0.1, 0.05, -0.04, 0.1, 0.1, 0, -0.05, 0, 0.02, 0;
  sc.initial_weights.kind = InitialWeights::Kind::pd_quadratic;
  sc.initial_weights.pd_diag = Eigen::VectorXd::Constant(12, 2.0);
  sc.initial_weights.pd_cross = Eigen::VectorXd::Constant(6, 0.5);
  sc.duration = 1.0;
  sc.dt = 0.002;

  const SimEngine engine(sc);
  const TrajectoryLog log = engine.run();
  REQUIRE(log.status == RunStatus::completed);
  // weights must not have moved
  const WeightSet w0 = engine.initial_weights();
  CHECK((log.final_weights.Wc - w0.Wc).norm() == 0.0);
  CHECK((log.final_weights.Wa1 - w0.Wa1).norm() == 0.0);

  // independent reference: body-frame integration with the same frozen policy
  const auto basis = sc.make_basis_set();
  const auto tau_bar = [&](double, const Eigen::VectorXd& zeta) {
    const AffineDynamics dyn = engine.dynamics().affine(zeta);
    return Eigen::VectorXd(
        policy_hat(w0.Wa1, zeta, *basis, dyn, sc.cost, Player::one));
  };
  const PoseState eta0 = PoseState::from_vector(sc.initial_state.head<6>());
  const Vec6 nu0 =
      assemble_J_inverse(eta0) * sc.initial_state.tail<6>();
  const auto [eta_end, nu_end] = stationkeep::testing::integrate_body_frame(
      *sc.vehicle, eta0, nu0, sc.duration, sc.dt, tau_bar);

  const Eigen::VectorXd zeta_end = log.rows.back().zeta;
  CHECK((zeta_end.head<6>() - eta_end.vector()).norm() <= 1e-6);
  const Vec6 eta_dot_end = assemble_J(eta_end) * nu_end;
  CHECK((zeta_end.tail<6>() - eta_dot_end).norm() <= 1e-6);
}

TEST_CASE("metrics closed forms") {
  TrajectoryLog log;
  log.state_dim = 2;
  log.input_dim = 1;
  const GameCost cost{Eigen::MatrixXd::Identity(2, 2),
                      Eigen::MatrixXd::Identity(1, 1), 1.0};

  SUBCASE("all-zero log gives all-zero metrics") {
    for (int i = 0; i <= 10; ++i) {
      LogRow row;
      row.t = 0.1 * i;
      row.zeta = Eigen::VectorXd::Zero(2);
      row.u1 = Eigen::VectorXd::Zero(1);
      row.u2_hat = row.tau_d = row.u1;
      log.rows.push_back(row);
    }
    const RunMetrics m = metrics(log, cost);
    CHECK(m.max_state_norm == 0.0);
    CHECK(m.final_state_norm == 0.0);
    CHECK(m.ultimate_bound_estimate == 0.0);
    CHECK(m.control_energy == 0.0);
    CHECK(m.max_abs_delta == 0.0);
    CHECK_FALSE(m.weight_errors.has_value());
  }

  SUBCASE("constant unit state and control over duration T") {
    const double T = 3.0;
    const int steps = 300;
    for (int i = 0; i <= steps; ++i) {
      LogRow row;
      row.t = T * i / steps;
      row.zeta = Eigen::VectorXd::Zero(2);
      row.zeta(0) = 1.0;
      row.u1 = Eigen::VectorXd::Constant(1, 1.0);
      row.u2_hat = row.tau_d = Eigen::VectorXd::Zero(1);
      log.rows.push_back(row);
    }
    const RunMetrics m = metrics(log, cost);
    CHECK(m.control_energy == doctest::Approx(T).epsilon(1e-12));
    CHECK(m.max_state_norm == 1.0);
    CHECK(m.ultimate_bound_estimate == 1.0);
  }

  SUBCASE("empty log is rejected") { CHECK_THROWS_AS(metrics(log, cost), std::invalid_argument); }
}

TEST_CASE("divergence is reported, not thrown") {
  Scenario sc = di_scenario();
  // unstable plant, zero control authority: state grows until the bound
  sc.plant->A << 2.0, 0.0, 0.0, 2.0;
  sc.initial_weights.kind = InitialWeights::Kind::zero;
  sc.gains = LearnerGains{0.0, 0.0, 0.0};
  sc.divergence_bound = 10.0;
  sc.duration = 5.0;
  const TrajectoryLog log = SimEngine(sc).run();
  CHECK(log.status == RunStatus::diverged);
  CHECK(log.divergence_time > 0.0);
  CHECK(log.divergence_time < 5.0);
  CHECK(log.divergence_reason.find("bound") != std::string::npos);
  // rows end before the divergence time
  CHECK(log.rows.back().t <= log.divergence_time);
}

TEST_CASE("pitch singularity aborts as divergence") {
  Scenario sc = auv_scenario();
  sc.initial_state.setZero();
  sc.initial_state(4) = 1.43;   // just inside the guard
  sc.initial_state(10) = 2.0;   // strong pitch rate pushes it over
  sc.gains = LearnerGains{0.0, 0.0, 0.0};
  sc.initial_weights.kind = InitialWeights::Kind::zero;
  sc.duration = 1.0;
  const TrajectoryLog log = SimEngine(sc).run();
  CHECK(log.status == RunStatus::diverged);
  CHECK(log.divergence_reason.find("pitch") != std::string::npos);
}

TEST_CASE("actor norms never exceed W_bar in logged runs") {
  Scenario sc = di_scenario();
  sc.w_bar = 1.2;  // tight ball, forces the projection to act
  Eigen::VectorXd w0(3);
  w0 << 0.5, 0.3, 0.5;
  sc.initial_weights.wc = sc.initial_weights.wa1 = sc.initial_weights.wa2 = w0;
  sc.duration = 4.0;
  sc.gains = LearnerGains{4.0, 2.0, 2.0};
  const TrajectoryLog log = SimEngine(sc).run();
  for (const auto& row : log.rows) {
    CHECK(row.norm_wa1 <= sc.w_bar + 1e-9);
    CHECK(row.norm_wa2 <= sc.w_bar + 1e-9);
  }
}

TEST_CASE("UUB surrogate: passing gain conditions give a contracting bounded run") {
  // stable decoupled plant in strict-attenuation geometry: lambda_min(R) >= gamma^2
  Scenario sc;
  sc.plant_kind = Scenario::PlantKind::linear;
  LinearPlant plant;
  plant.A = -Eigen::MatrixXd::Identity(2, 2);
  plant.B = Eigen::MatrixXd::Identity(2, 2);
  sc.plant = plant;
  sc.initial_state.resize(2);
  sc.initial_state << 1.2, -0.9;  // ||zeta(0)|| = 1.5, well outside the ultimate bound
  sc.duration = 20.0;
  sc.dt = 0.005;
  sc.cost = GameCost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2),
                     1.0};
  sc.strict_attenuation = true;
  sc.gains = LearnerGains{2.0, 0.5, 0.5};
  sc.samples.count = 12;
  sc.samples.strategy = SampleStrategy::latin_hypercube;
  sc.samples.seed = 5;
  sc.samples.box.lo = Eigen::VectorXd::Constant(2, -2.0);
  sc.samples.box.hi = Eigen::VectorXd::Constant(2, 2.0);
  sc.disturbance.kind = DisturbanceModel::Kind::none;
  sc.disturbance.amplitude = Eigen::VectorXd::Zero(2);
  sc.initial_weights.kind = InitialWeights::Kind::pd_quadratic;
  sc.initial_weights.pd_diag = Eigen::VectorXd::Constant(2, 1.0);
  sc.initial_weights.pd_cross = Eigen::VectorXd::Constant(1, 0.3);
  sc.w_bar = 5.0;
  sc.backend = Backend::serial;

  const SimEngine engine(sc);
  const TrajectoryLog log = engine.run();
  REQUIRE(log.status == RunStatus::completed);

  // the scenario must actually sit in the checker's feasible region
  const GainConditionReport rep = check_gain_conditions(
      sc.cost, sc.gains, log.rows.front().c_lower, 1.0 /* L_f of A = -I */,
      0.0 /* exact basis */, 1.0);
  REQUIRE(rep.all_pass());

  const RunMetrics m = metrics(log, sc.cost);
  CHECK(m.max_state_norm <= 1.5 + 1e-9);  // monotone contraction, never exceeds start
  CHECK(m.ultimate_bound_estimate < sc.initial_state.norm());
  CHECK(m.control_energy >= 0.0);
}

TEST_CASE("disturbance models") {
  DisturbanceModel d;
  d.amplitude = Eigen::VectorXd::Constant(2, 3.0);

  d.kind = DisturbanceModel::Kind::none;
  CHECK(d.eval(1.7).norm() == 0.0);

  d.kind = DisturbanceModel::Kind::constant_current;
  CHECK((d.eval(5.0) - d.amplitude).norm() == 0.0);

  d.kind = DisturbanceModel::Kind::sinusoidal;
  d.frequency = 2.0;
  d.phase = 0.5;
  CHECK((d.eval(1.0) - d.amplitude * std::sin(2.5)).norm() == 0.0);

  CHECK_THROWS_AS(d.validate(3), std::invalid_argument);
  CHECK_NOTHROW(d.validate(2));
}

TEST_CASE("AUV disturbance is applied through J^-T") {
  Scenario sc = auv_scenario();
  sc.disturbance.kind = DisturbanceModel::Kind::constant_current;
  sc.disturbance.amplitude = Eigen::VectorXd::Zero(6);
  sc.disturbance.amplitude(0) = 10.0;
  const SimEngine engine(sc);

  Eigen::VectorXd zeta = Eigen::VectorXd::Zero(12);
  zeta(5) = M_PI / 2;  // yawed 90 degrees
  const Eigen::VectorXd applied = engine.applied_disturbance(0.0, zeta);

  const PoseState eta = PoseState::from_vector(zeta.head<6>());
  const Eigen::VectorXd expect =
      assemble_J_inverse(eta).transpose() * sc.disturbance.amplitude;
  CHECK((applied - expect).norm() == 0.0);
  // body surge force appears as earth-frame y force under 90-degree yaw
  CHECK(applied(1) == doctest::Approx(10.0));
  CHECK(std::abs(applied(0)) < 1e-12);
}

TEST_CASE("csv schema is stable") {
  Scenario sc = di_scenario();
  sc.duration = 0.02;
  sc.dt = 0.01;
  const TrajectoryLog log = SimEngine(sc).run();
  const auto header = log.csv_header();
  REQUIRE(header.size() == 1 + 2 + 1 + 1 + 1 + 7);
  CHECK(header.front() == "t");
  CHECK(header.back() == "c_upper");

  std::ostringstream out;
  log.write_csv(out);
  const std::string text = out.str();
  CHECK(text.rfind("t,zeta_0,zeta_1,u1_0,u2hat_0,taud_0,delta,norm_wc,norm_wa1,norm_wa2,rank,c_lower,c_upper\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3);
}

TEST_CASE("scenario validation errors") {
  Scenario sc = di_scenario();
  sc.duration = 0.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = di_scenario();
  sc.initial_state.resize(3);
  sc.initial_state.setZero();
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = di_scenario();
  sc.samples.box.lo = Eigen::VectorXd::Constant(3, -1.0);
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);

  sc = di_scenario();
  sc.gains.eta_c = -1.0;
  CHECK_THROWS_AS(sc.validate(), std::invalid_argument);
}

TEST_CASE("shipped scenario files load and validate") {
  const std::string dir = std::string(SK_SOURCE_DIR) + "/scenarios/";
  CHECK_NOTHROW(Scenario::load(dir + "lq_scalar.json"));
  CHECK_NOTHROW(Scenario::load(dir + "lq_double_integrator.json"));
  CHECK_NOTHROW(Scenario::load(dir + "auv_station_keeping.json"));
}
