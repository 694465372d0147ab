#include "stationkeep/cli_harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

#include <nlohmann/json.hpp>

#include "stationkeep/rng.hpp"
#include "stationkeep/sim_engine.hpp"

namespace stationkeep {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// sup ||f(zeta)|| / ||zeta|| sampled over the scenario's compact set.
double estimate_lipschitz(const DynamicsProvider& dyn, const Box& box, int probes,
                          std::uint64_t seed) {
  DeterministicRng rng(seed);
  double lf = 0.0;
  for (int i = 0; i < probes; ++i) {
    Eigen::VectorXd zeta(box.dim());
    for (int d = 0; d < box.dim(); ++d) zeta(d) = rng.uniform(box.lo(d), box.hi(d));
    const double norm = zeta.norm();
    if (norm < 1e-9) continue;
    lf = std::max(lf, dyn.affine(zeta).f.norm() / norm);
  }
  return lf;
}

json conditions_to_json(const GainConditionReport& report, double c_lower,
                        double lf_estimate, const Scenario& sc) {
  json conds = json::array();
  for (const auto& c : report.conditions)
    conds.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}});
  return json{{"inputs",
               {{"c_lower", c_lower},
                {"lf_estimate", lf_estimate},
                {"eps_prime_bound", sc.eps_prime_bound},
                {"epsilon_free", sc.epsilon_free},
                {"q_lower", sc.cost.q_lower()},
                {"r_min_eig", sc.cost.r_min_eig()},
                {"gamma", sc.cost.gamma}}},
              {"conditions", conds},
              {"all_pass", report.all_pass()}};
}

struct PointResult {
  std::string status = "completed";  // completed | diverged | config-error
  bool oracle_converged = true;
  RunMetrics run_metrics{};
  bool has_metrics = false;
};

/// Shared by cmd_run and each sweep grid point.
PointResult run_scenario_to_dir(const Scenario& scenario, const fs::path& dir,
                                bool attach_oracle) {
  PointResult result;
  fs::create_directories(dir);

  const SimEngine engine(scenario);
  const TrajectoryLog log = engine.run();

  std::optional<WeightComparison> cmp;
  json oracle_json;
  if (attach_oracle) {
    oracle_json["attached"] = true;
    try {
      const GareSolution sol =
          gare_solve(*scenario.plant, scenario.cost.Q, scenario.cost.R,
                     scenario.cost.gamma);
      cmp = compare_weights(log.final_weights, ideal_weights(sol, engine.basis()),
                            engine.basis(), engine.dynamics(), scenario.cost);
      oracle_json["converged"] = true;
      oracle_json["gare_residual"] = sol.residual;
      oracle_json["gare_iterations"] = sol.iterations;
    } catch (const GareNonConvergenceError& e) {
      result.oracle_converged = false;
      oracle_json["converged"] = false;
      oracle_json["message"] = e.what();
    }
  } else {
    oracle_json["attached"] = false;
  }

  const RunMetrics m = metrics(log, scenario.cost, cmp ? &*cmp : nullptr);
  result.run_metrics = m;
  result.has_metrics = true;

  {
    std::ofstream csv(dir / "trajectory.csv");
    log.write_csv(csv);
  }

  json summary{{"name", scenario.name},
               {"status", log.status == RunStatus::completed ? "completed" : "diverged"},
               {"rows", log.rows.size()},
               {"duration", scenario.duration},
               {"dt", scenario.dt},
               {"seed", scenario.seed},
               {"metrics",
                {{"max_state_norm", m.max_state_norm},
                 {"final_state_norm", m.final_state_norm},
                 {"ultimate_bound_estimate", m.ultimate_bound_estimate},
                 {"control_energy", m.control_energy},
                 {"max_abs_delta", m.max_abs_delta},
                 {"final_abs_delta", m.final_abs_delta}}},
               {"oracle", oracle_json},
               {"warnings", log.warnings}};
  if (log.status == RunStatus::diverged) {
    summary["divergence_time"] = log.divergence_time;
    summary["divergence_reason"] = log.divergence_reason;
    result.status = "diverged";
  }
  if (scenario.ultimate_bound) {
    summary["ultimate_bound_configured"] = *scenario.ultimate_bound;
    summary["ultimate_bound_satisfied"] =
        m.ultimate_bound_estimate < *scenario.ultimate_bound;
  }
  if (m.weight_errors) {
    summary["metrics"]["wc_rel_err"] = m.weight_errors->wc_rel_err;
    summary["metrics"]["wa1_rel_err"] = m.weight_errors->wa1_rel_err;
    summary["metrics"]["wa2_rel_err"] = m.weight_errors->wa2_rel_err;
    summary["metrics"]["max_policy_err"] = m.weight_errors->max_policy_err;
  }
  std::ofstream(dir / "summary.json") << summary.dump(2) << '\n';

  // Gain-condition report: c_lower from the t=0 rank check, L_f sampled over
  // the configured compact set.
  const double c_lower = log.rows.empty() ? 0.0 : log.rows.front().c_lower;
  const double lf =
      estimate_lipschitz(engine.dynamics(), scenario.samples.box, 512, scenario.seed);
  const GainConditionReport report = check_gain_conditions(
      scenario.cost, scenario.gains, c_lower, lf, scenario.eps_prime_bound,
      scenario.epsilon_free);
  std::ofstream(dir / "conditions.json")
      << conditions_to_json(report, c_lower, lf, scenario).dump(2) << '\n';

  return result;
}

void apply_overrides(Scenario& sc, const RunManifest& manifest) {
  if (manifest.dt) sc.dt = *manifest.dt;
  if (manifest.duration) sc.duration = *manifest.duration;
  if (manifest.seed) sc.seed = *manifest.seed;
  sc.validate();
}

void apply_axis(Scenario& sc, const std::string& axis, double value) {
  if (axis == "eta_c")
    sc.gains.eta_c = value;
  else if (axis == "eta_a1")
    sc.gains.eta_a1 = value;
  else if (axis == "eta_a2")
    sc.gains.eta_a2 = value;
  else if (axis == "gamma")
    sc.cost.gamma = value;
  else
    throw std::invalid_argument("unknown sweep axis: " + axis);
}

}  // namespace

RunManifest load_sweep_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open manifest: " + path);
  const json j = json::parse(in);

  RunManifest m;
  const fs::path base = fs::path(path).parent_path();
  m.scenario_path = (base / j.at("scenario").get<std::string>()).string();
  m.out_dir = j.value("out", "sweep_out");
  m.attach_oracle = j.value("attach_oracle", false);
  if (!j.contains("axes") || j.at("axes").empty())
    throw std::invalid_argument("sweep manifest needs non-empty axes");
  for (const auto& [axis, values] : j.at("axes").items()) {
    if (!values.is_array() || values.empty())
      throw std::invalid_argument("sweep axis '" + axis + "' must be a non-empty array");
    m.sweep_axes[axis] = values.get<std::vector<double>>();
  }
  return m;
}

int cmd_run(const RunManifest& manifest, std::ostream& out) {
  Scenario scenario;
  try {
    scenario = Scenario::load(manifest.scenario_path);
    apply_overrides(scenario, manifest);
    if (manifest.attach_oracle && scenario.plant_kind != Scenario::PlantKind::linear)
      throw std::invalid_argument("oracle attachment requires a linear plant");
  } catch (const std::exception& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  try {
    const PointResult res =
        run_scenario_to_dir(scenario, manifest.out_dir, manifest.attach_oracle);
    out << "run '" << scenario.name << "': " << res.status << "; outputs in "
        << manifest.out_dir << '\n';
    return res.status == "completed" ? kExitOk : kExitDivergence;
  } catch (const std::exception& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

namespace {

struct VerifyCheck {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<VerifyCheck> verify_suite(bool corrupt_tolerance_hook) {
  std::vector<VerifyCheck> checks;
  const auto add = [&](const std::string& name, double measured, double tol) {
    checks.push_back({name, measured, tol, measured <= tol});
  };

  // Game Riccati oracle spot values.
  {
    const GareSolution sol = gare_solve(scalar_benchmark(),
                                        Eigen::MatrixXd::Identity(1, 1),
                                        Eigen::MatrixXd::Identity(1, 1),
                                        std::sqrt(2.0));
    add("gare_scalar_p", std::abs(sol.P(0, 0) - (-2.0 + std::sqrt(6.0))), 1e-10);
  }
  {
    LinearPlant plant;
    plant.A = -Eigen::MatrixXd::Identity(2, 2);
    plant.B = Eigen::MatrixXd::Identity(2, 2);
    const GareSolution sol =
        gare_solve(plant, Eigen::MatrixXd::Identity(2, 2),
                   Eigen::MatrixXd::Identity(2, 2),
                   std::numeric_limits<double>::infinity());
    const Eigen::MatrixXd expect = (std::sqrt(2.0) - 1.0) * Eigen::MatrixXd::Identity(2, 2);
    add("gare_lqr_limit_decoupled", (sol.P - expect).norm(), 1e-8);
  }
  {
    const LinearPlant plant = double_integrator_benchmark();
    GameCost cost{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1),
                  std::sqrt(2.0)};
    const GareSolution sol = gare_solve(plant, cost.Q, cost.R, cost.gamma);
    const LinearDynamics dyn(plant);
    DeterministicRng rng(7);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
      const Eigen::VectorXd zeta = random_ball_point(rng, 2, 2.0);
      const Eigen::VectorXd grad = 2.0 * sol.P * zeta;
      const AffineDynamics ad = dyn.affine(zeta);
      const auto [u1, u2] = policies_from_gradient(grad, ad.g, cost);
      const double h = hamiltonian(zeta, grad, u1, u2, ad, cost);
      worst = std::max(worst, std::abs(h) / (1.0 + zeta.squaredNorm()));
    }
    add("hji_residual_double_integrator", worst, 1e-8);
  }

  // Kinematics properties.
  {
    DeterministicRng rng(11);
    double ortho = 0.0, det = 0.0, inv = 0.0;
    for (int i = 0; i < 1000; ++i) {
      PoseState eta;
      eta.phi = rng.uniform(-M_PI, M_PI);
      eta.theta = rng.uniform(-(M_PI / 2 - 0.12), M_PI / 2 - 0.12);
      eta.psi = rng.uniform(-M_PI, M_PI);
      const Mat3 j1 = rotation_J1(eta);
      ortho = std::max(ortho, (j1.transpose() * j1 - Mat3::Identity()).norm());
      det = std::max(det, std::abs(j1.determinant() - 1.0));
      inv = std::max(inv,
                     (assemble_J(eta) * assemble_J_inverse(eta) - Mat6::Identity()).norm());
    }
    add("rotation_orthonormality",
        ortho, corrupt_tolerance_hook ? -1.0 : 1e-12);
    add("rotation_determinant", det, 1e-12);
    add("transform_inverse", inv, 1e-10);
  }

  // Dynamics consistency.
  {
    const VehicleParams params = VehicleParams::generic();
    DeterministicRng rng(13);
    double skew_worst = 0.0;
    for (int i = 0; i < 500; ++i) {
      Vec6 nu;
      for (int d = 0; d < 6; ++d) nu(d) = rng.uniform(-3.0, 3.0);
      const Mat6 c = coriolis_matrix(params.inertia(), nu);
      skew_worst = std::max(skew_worst, std::abs(nu.dot(c * nu)));
    }
    add("coriolis_skew", skew_worst, 1e-10);

    const AuvDynamics dyn(params);
    add("affine_equilibrium", dyn.affine(Eigen::VectorXd::Zero(12)).f.norm(), 1e-15);
  }

  // Gradient checks against central finite differences.
  {
    const QuadraticBasis basis(12);
    DeterministicRng rng(17);
    double worst = 0.0;
    const double h = 1e-6;
    for (int s = 0; s < 100; ++s) {
      Eigen::VectorXd zeta(12);
      for (int d = 0; d < 12; ++d) zeta(d) = rng.uniform(-2.0, 2.0);
      const Eigen::MatrixXd jac = basis.sigma_jacobian(zeta);
      Eigen::MatrixXd fd(basis.size(), 12);
      for (int d = 0; d < 12; ++d) {
        Eigen::VectorXd zp = zeta, zm = zeta;
        zp(d) += h;
        zm(d) -= h;
        fd.col(d) = (basis.sigma(zp) - basis.sigma(zm)) / (2.0 * h);
      }
      worst = std::max(worst, (fd - jac).norm() / std::max(1.0, jac.norm()));
    }
    add("sigma_jacobian_fd", worst, 1e-6);
  }
  {
    DeterministicRng rng(19);
    double worst = 0.0;
    const double h = 1e-6;
    for (int s = 0; s < 100; ++s) {
      PoseState eta;
      eta.phi = rng.uniform(-1.2, 1.2);
      eta.theta = rng.uniform(-1.1, 1.1);
      eta.psi = rng.uniform(-M_PI, M_PI);
      Vec6 eta_dot;
      for (int d = 0; d < 6; ++d) eta_dot(d) = rng.uniform(-1.0, 1.0);
      const Mat6 analytic = jacobian_J_dot(eta, eta_dot);
      const PoseState ep = PoseState::from_vector(eta.vector() + h * eta_dot);
      const PoseState em = PoseState::from_vector(eta.vector() - h * eta_dot);
      const Mat6 fd = (assemble_J(ep) - assemble_J(em)) / (2.0 * h);
      worst = std::max(worst, (fd - analytic).norm() / std::max(1.0, analytic.norm()));
    }
    add("jdot_fd", worst, 1e-6);
  }

  return checks;
}

}  // namespace

int cmd_verify(std::ostream& out, bool corrupt_tolerance_hook) {
  const auto checks = verify_suite(corrupt_tolerance_hook);
  bool all_pass = true;
  out << std::left << std::setw(34) << "check" << std::setw(16) << "measured"
      << std::setw(16) << "tolerance" << "result\n";
  for (const auto& c : checks) {
    out << std::left << std::setw(34) << c.name << std::setw(16)
        << std::setprecision(6) << std::scientific << c.measured << std::setw(16)
        << c.tolerance << (c.pass ? "PASS" : "FAIL") << '\n';
    out.unsetf(std::ios::scientific);
    all_pass = all_pass && c.pass;
  }
  out << (all_pass ? "verification passed" : "verification FAILED") << '\n';
  return all_pass ? kExitOk : kExitVerifyFailure;
}

int cmd_sweep(const RunManifest& manifest, std::ostream& out) {
  Scenario base;
  std::vector<std::map<std::string, double>> grid;
  try {
    base = Scenario::load(manifest.scenario_path);
    apply_overrides(base, manifest);
    if (manifest.attach_oracle && base.plant_kind != Scenario::PlantKind::linear)
      throw std::invalid_argument("oracle attachment requires a linear plant");
    if (manifest.sweep_axes.empty())
      throw std::invalid_argument("sweep needs at least one axis");

    grid.push_back({});
    for (const auto& [axis, values] : manifest.sweep_axes) {
      Scenario probe = base;
      apply_axis(probe, axis, values.front());  // rejects unknown axes upfront
      std::vector<std::map<std::string, double>> next;
      for (const auto& point : grid)
        for (double v : values) {
          auto p = point;
          p[axis] = v;
          next.push_back(std::move(p));
        }
      grid = std::move(next);
    }
  } catch (const std::exception& e) {
    out << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const fs::path root = manifest.out_dir;
  fs::create_directories(root);

  struct Row {
    std::map<std::string, double> point;
    std::string dir;
    std::string status;
    RunMetrics m{};
    bool has_metrics = false;
    bool oracle_converged = true;
  };
  std::vector<Row> rows(grid.size());

  std::mutex next_mutex;
  std::size_t next = 0;
  const unsigned workers =
      std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(grid.size())));
  auto worker = [&]() {
    for (;;) {
      std::size_t i;
      {
        std::lock_guard lock(next_mutex);
        if (next >= grid.size()) return;
        i = next++;
      }
      Row& row = rows[i];
      row.point = grid[i];
      char name[32];
      std::snprintf(name, sizeof(name), "point_%03zu", i);
      row.dir = name;
      try {
        Scenario sc = base;
        for (const auto& [axis, value] : grid[i]) apply_axis(sc, axis, value);
        sc.validate();
        const PointResult res =
            run_scenario_to_dir(sc, root / row.dir, manifest.attach_oracle);
        row.status = res.status;
        row.m = res.run_metrics;
        row.has_metrics = res.has_metrics;
        row.oracle_converged = res.oracle_converged;
      } catch (const std::exception& e) {
        row.status = "config-error";
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  // Coordinator writes the index once at the end.
  std::ofstream index(root / "index.csv");
  index << "point,dir";
  for (const auto& [axis, _] : manifest.sweep_axes) index << ',' << axis;
  index << ",status,oracle,final_state_norm,final_abs_delta,control_energy,wc_rel_err\n";
  index << std::setprecision(17);
  bool any_diverged = false;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& row = rows[i];
    index << i << ',' << row.dir;
    for (const auto& [axis, _] : manifest.sweep_axes)
      index << ',' << row.point.at(axis);
    index << ',' << row.status << ','
          << (!manifest.attach_oracle
                  ? "none"
                  : (row.oracle_converged ? "converged" : "non-converged"));
    if (row.has_metrics)
      index << ',' << row.m.final_state_norm << ',' << row.m.final_abs_delta << ','
            << row.m.control_energy;
    else
      index << ",,,";
    if (row.has_metrics && row.m.weight_errors)
      index << ',' << row.m.weight_errors->wc_rel_err;
    else
      index << ',';
    index << '\n';
    any_diverged = any_diverged || row.status == "diverged";
  }
  out << "sweep: " << rows.size() << " points; index at "
      << (root / "index.csv").string() << '\n';
  return any_diverged ? kExitDivergence : kExitOk;
}

}  // namespace stationkeep
