#include "stationkeep/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "stationkeep/lq_oracle.hpp"
#include "stationkeep/rng.hpp"

namespace stationkeep {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

Eigen::VectorXd parse_vector(const json& a, int size, const std::string& what) {
  if (!a.is_array() || static_cast<int>(a.size()) != size)
    fail(what + " must be an array of " + std::to_string(size));
  Eigen::VectorXd v(size);
  for (int i = 0; i < size; ++i) v(i) = a.at(i).get<double>();
  return v;
}

/// Square matrix shorthand: a number means s*I, an n-array a diagonal, an
/// n*n-array the full row-major matrix.
Eigen::MatrixXd parse_square(const json& a, int n, const std::string& what) {
  if (a.is_number())
    return a.get<double>() * Eigen::MatrixXd::Identity(n, n);
  if (a.is_array() && static_cast<int>(a.size()) == n && n != n * n)
    return parse_vector(a, n, what).asDiagonal();
  if (a.is_array() && static_cast<int>(a.size()) == n * n) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = a.at(n * i + j).get<double>();
    return m;
  }
  fail(what + " must be a scalar, an array of " + std::to_string(n) +
       " (diagonal), or a row-major array of " + std::to_string(n * n));
}

LinearPlant parse_linear_plant(const json& p, const std::string& base_dir) {
  if (p.contains("benchmark")) {
    const std::string which = p.at("benchmark").get<std::string>();
    if (which == "scalar") return scalar_benchmark();
    if (which == "double-integrator") return double_integrator_benchmark();
    if (which == "linearized-auv") {
      if (!p.contains("vehicle")) fail("linearized-auv benchmark needs a vehicle");
      const auto& v = p.at("vehicle");
      VehicleParams params = v.is_string()
                                 ? VehicleParams::load(
                                       (std::filesystem::path(base_dir) /
                                        v.get<std::string>()).string())
                                 : VehicleParams::from_json(v);
      return linearized_auv(params);
    }
    fail("unknown linear benchmark: " + which);
  }
  const int n = p.at("n").get<int>();
  const int k = p.at("k").get<int>();
  if (n < 1 || k < 1) fail("plant dimensions must be positive");
  LinearPlant plant;
  plant.A = parse_square(p.at("A"), n, "plant.A");
  const auto& bj = p.at("B");
  if (!bj.is_array() || static_cast<int>(bj.size()) != n * k)
    fail("plant.B must be a row-major array of " + std::to_string(n * k));
  plant.B.resize(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) plant.B(i, j) = bj.at(k * i + j).get<double>();
  return plant;
}

SampleStrategy parse_strategy(const std::string& s) {
  if (s == "grid") return SampleStrategy::grid;
  if (s == "latin-hypercube") return SampleStrategy::latin_hypercube;
  fail("unknown sample strategy: " + s);
}

}  // namespace

Eigen::VectorXd DisturbanceModel::eval(double t) const {
  switch (kind) {
    case Kind::none:
      return Eigen::VectorXd::Zero(amplitude.size());
    case Kind::constant_current:
      return amplitude;
    case Kind::sinusoidal:
      return amplitude * std::sin(frequency * t + phase);
  }
  return Eigen::VectorXd::Zero(amplitude.size());
}

void DisturbanceModel::validate(int input_dim) const {
  if (amplitude.size() != input_dim)
    fail("disturbance amplitude must have the plant input dimension");
  if (!amplitude.allFinite()) fail("disturbance amplitude must be finite");
  if (!std::isfinite(frequency) || !std::isfinite(phase))
    fail("disturbance frequency/phase must be finite");
}

int Scenario::state_dim() const {
  return plant_kind == PlantKind::auv ? 12 : (plant ? plant->n() : 0);
}

int Scenario::input_dim() const {
  return plant_kind == PlantKind::auv ? 6 : (plant ? plant->k() : 0);
}

std::unique_ptr<DynamicsProvider> Scenario::make_dynamics() const {
  if (plant_kind == PlantKind::auv) {
    if (!vehicle) fail("AUV scenario is missing vehicle parameters");
    return std::make_unique<AuvDynamics>(*vehicle, theta_margin);
  }
  if (!plant) fail("linear scenario is missing the plant");
  return std::make_unique<LinearDynamics>(*plant);
}

std::unique_ptr<BasisSet> Scenario::make_basis_set() const {
  return make_basis(basis_name, state_dim());
}

WeightSet Scenario::make_initial_weights(const BasisSet& basis) const {
  const int m = basis.size();
  WeightSet w;
  w.W_bar = w_bar;
  switch (initial_weights.kind) {
    case InitialWeights::Kind::zero:
      w.Wc = w.Wa1 = w.Wa2 = Eigen::VectorXd::Zero(m);
      break;
    case InitialWeights::Kind::uniform_random: {
      DeterministicRng rng(seed);
      Eigen::VectorXd v(m);
      for (int i = 0; i < m; ++i)
        v(i) = rng.uniform(-initial_weights.scale, initial_weights.scale);
      w.Wc = w.Wa1 = w.Wa2 = v;
      break;
    }
    case InitialWeights::Kind::explicit_values: {
      if (!initial_weights.wc || !initial_weights.wa1 || !initial_weights.wa2)
        fail("explicit initial weights need Wc, Wa1 and Wa2");
      w.Wc = *initial_weights.wc;
      w.Wa1 = *initial_weights.wa1;
      w.Wa2 = *initial_weights.wa2;
      if (w.Wc.size() != m || w.Wa1.size() != m || w.Wa2.size() != m)
        fail("explicit initial weights must have the basis feature count");
      break;
    }
    case InitialWeights::Kind::pd_quadratic: {
      // Value surface zeta'P0 zeta with diagonal P0 plus couplings between
      // each coordinate and its rate partner zeta_{i+n/2}. PD requires each
      // 2x2 block [d_i, b_i/2; b_i/2, d_{i+h}] to be PD.
      const auto* quad = dynamic_cast<const QuadraticBasis*>(&basis);
      if (quad == nullptr || quad->dim() % 2 != 0)
        fail("pd-quadratic initial weights need the quadratic basis on an even-dimensional state");
      const int n = quad->dim(), h = n / 2;
      if (initial_weights.pd_diag.size() != n || initial_weights.pd_cross.size() != h)
        fail("pd-quadratic initial weights are missing diag/cross entries");
      const Eigen::VectorXd& d = initial_weights.pd_diag;
      const Eigen::VectorXd& b = initial_weights.pd_cross;
      for (int i = 0; i < h; ++i)
        if (!(d(i) > 0.0) || !(d(i + h) > 0.0) || b(i) * b(i) >= 4.0 * d(i) * d(i + h))
          fail("pd-quadratic initial weights must be positive definite "
               "(need cross_i^2 < 4 * diag_i * diag_{i+n/2})");
      Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
      for (int i = 0; i < n; ++i) v(quad->monomial_index(i, i)) = d(i);
      for (int i = 0; i < h; ++i) v(quad->monomial_index(i, i + h)) = b(i);
      w.Wc = w.Wa1 = w.Wa2 = v;
      break;
    }
  }
  if (w.Wa1.norm() > w_bar || w.Wa2.norm() > w_bar)
    fail("initial actor weights must lie inside the projection ball");
  return w;
}

void Scenario::validate() const {
  if (!(dt > 0.0)) fail("dt must be positive");
  if (!(duration >= dt)) fail("duration must be at least dt");
  const int n = state_dim();
  const int k = input_dim();
  if (n == 0) fail("scenario has no plant");
  if (initial_state.size() != n)
    fail("initial_state must have dimension " + std::to_string(n));
  if (plant_kind == PlantKind::auv)
    require_valid_pitch(initial_state(4), theta_margin);
  if (cost.Q.rows() != n) fail("cost.Q must be " + std::to_string(n) + "-dimensional");
  if (cost.R.rows() != k) fail("cost.R must be " + std::to_string(k) + "-dimensional");
  cost.validate(strict_attenuation);
  // zero gains are allowed here: they freeze the learner, which is a useful
  // diagnostic (pure plant simulation)
  if (gains.eta_c < 0.0 || gains.eta_a1 < 0.0 || gains.eta_a2 < 0.0)
    fail("adaptation gains must be non-negative");
  if (!(w_bar > 0.0)) fail("W_bar must be positive");
  if (samples.count < 1) fail("samples.N must be positive");
  if (samples.refresh_cadence < 1 || samples.rank_cadence < 1)
    fail("sample cadences must be >= 1");
  if (samples.box.dim() != n) fail("sample box must match the state dimension");
  samples.box.validate();
  disturbance.validate(k);
  if (!(divergence_bound > 0.0)) fail("divergence_bound must be positive");
  if (!(epsilon_free > 0.0)) fail("epsilon_free must be positive");
  if (eps_prime_bound < 0.0) fail("eps_prime_bound must be non-negative");
}

Scenario Scenario::from_json(const json& j, const std::string& base_dir) {
  Scenario sc;
  sc.name = j.value("name", std::string("scenario"));

  const auto& pj = j.at("plant");
  const std::string kind = pj.at("kind").get<std::string>();
  if (kind == "auv") {
    sc.plant_kind = PlantKind::auv;
    const auto& v = pj.at("vehicle");
    sc.vehicle = v.is_string()
                     ? VehicleParams::load(
                           (std::filesystem::path(base_dir) / v.get<std::string>())
                               .string())
                     : VehicleParams::from_json(v);
    sc.theta_margin = pj.value("theta_margin", kDefaultThetaMargin);
  } else if (kind == "linear") {
    sc.plant_kind = PlantKind::linear;
    sc.plant = parse_linear_plant(pj, base_dir);
  } else {
    fail("plant.kind must be 'auv' or 'linear'");
  }

  const int n = sc.state_dim();
  const int k = sc.input_dim();

  sc.initial_state = parse_vector(j.at("initial_state"), n, "initial_state");
  sc.duration = j.at("duration").get<double>();
  sc.dt = j.at("dt").get<double>();

  const auto& cj = j.at("cost");
  sc.cost.Q = parse_square(cj.at("Q"), n, "cost.Q");
  sc.cost.R = parse_square(cj.at("R"), k, "cost.R");
  sc.cost.gamma = cj.at("gamma").get<double>();

  const auto& gj = j.at("gains");
  sc.gains.eta_c = gj.at("eta_c").get<double>();
  sc.gains.eta_a1 = gj.at("eta_a1").get<double>();
  sc.gains.eta_a2 = gj.at("eta_a2").get<double>();

  if (j.contains("basis")) sc.basis_name = j.at("basis").value("name", "quadratic");

  const auto& sj = j.at("samples");
  sc.samples.count = sj.at("N").get<int>();
  sc.samples.strategy = parse_strategy(sj.value("strategy", "latin-hypercube"));
  sc.samples.seed = sj.value("seed", 0ULL);
  sc.samples.box.lo = parse_vector(sj.at("box").at("lo"), n, "samples.box.lo");
  sc.samples.box.hi = parse_vector(sj.at("box").at("hi"), n, "samples.box.hi");
  sc.samples.refresh_cadence = sj.value("refresh_cadence", 1);
  sc.samples.rank_cadence = sj.value("rank_cadence", 100);

  if (j.contains("disturbance")) {
    const auto& dj = j.at("disturbance");
    const std::string dkind = dj.value("kind", "none");
    if (dkind == "none") {
      sc.disturbance.kind = DisturbanceModel::Kind::none;
      sc.disturbance.amplitude = Eigen::VectorXd::Zero(k);
    } else {
      sc.disturbance.kind = dkind == "constant-current"
                                ? DisturbanceModel::Kind::constant_current
                                : DisturbanceModel::Kind::sinusoidal;
      if (dkind != "constant-current" && dkind != "sinusoidal")
        fail("disturbance.kind must be none|constant-current|sinusoidal");
      sc.disturbance.amplitude =
          parse_vector(dj.at("amplitude"), k, "disturbance.amplitude");
      sc.disturbance.frequency = dj.value("frequency", 0.0);
      sc.disturbance.phase = dj.value("phase", 0.0);
    }
  } else {
    sc.disturbance.amplitude = Eigen::VectorXd::Zero(k);
  }

  if (j.contains("initial_weights")) {
    const auto& wj = j.at("initial_weights");
    const std::string wkind = wj.value("kind", "uniform-random");
    if (wkind == "zero") {
      sc.initial_weights.kind = InitialWeights::Kind::zero;
    } else if (wkind == "uniform-random") {
      sc.initial_weights.kind = InitialWeights::Kind::uniform_random;
      sc.initial_weights.scale = wj.value("scale", 0.1);
    } else if (wkind == "explicit") {
      sc.initial_weights.kind = InitialWeights::Kind::explicit_values;
      const int m = make_basis(sc.basis_name, n)->size();
      sc.initial_weights.wc = parse_vector(wj.at("Wc"), m, "initial_weights.Wc");
      sc.initial_weights.wa1 = parse_vector(wj.at("Wa1"), m, "initial_weights.Wa1");
      sc.initial_weights.wa2 = parse_vector(wj.at("Wa2"), m, "initial_weights.Wa2");
    } else if (wkind == "pd-quadratic") {
      sc.initial_weights.kind = InitialWeights::Kind::pd_quadratic;
      const auto broadcast = [&](const char* key, int len, double fallback) {
        if (!wj.contains(key))
          return Eigen::VectorXd(Eigen::VectorXd::Constant(len, fallback));
        const auto& v = wj.at(key);
        if (v.is_number())
          return Eigen::VectorXd(Eigen::VectorXd::Constant(len, v.get<double>()));
        return parse_vector(v, len, std::string("initial_weights.") + key);
      };
      sc.initial_weights.pd_diag = broadcast("scale", n, 1.0);
      sc.initial_weights.pd_cross = broadcast("cross", n / 2, 0.0);
    } else {
      fail("initial_weights.kind must be zero|uniform-random|explicit|pd-quadratic");
    }
  }

  sc.w_bar = j.value("W_bar", 10.0);
  sc.seed = j.value("seed", 0ULL);
  sc.divergence_bound = j.value("divergence_bound", 1e3);
  if (j.contains("ultimate_bound")) sc.ultimate_bound = j.at("ultimate_bound").get<double>();
  if (j.contains("backend")) {
    const std::string b = j.at("backend").get<std::string>();
    if (b == "serial")
      sc.backend = Backend::serial;
    else if (b == "parallel")
      sc.backend = Backend::parallel;
    else
      fail("backend must be serial|parallel");
  }
  sc.strict_attenuation = j.value("strict_attenuation", false);
  sc.eps_prime_bound = j.value("eps_prime_bound", 0.0);
  sc.epsilon_free = j.value("epsilon_free", 1.0);

  sc.validate();
  return sc;
}

Scenario Scenario::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open scenario file: " + path);
  json j = json::parse(in);  // parse errors carry line/byte diagnostics
  return from_json(j, std::filesystem::path(path).parent_path().string());
}

}  // namespace stationkeep
