#include "stationkeep/sim_engine.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace stationkeep {

namespace {

/// Rescale an actor estimate back onto the ball; discrete RK4 stages can
/// overshoot the boundary layer by integration error.
void clamp_to_ball(Eigen::Ref<Eigen::VectorXd> w, double w_bar) {
  const double norm = w.norm();
  if (norm > w_bar) w *= w_bar / norm;
}

}  // namespace

SimEngine::SimEngine(const Scenario& scenario) : scenario_(scenario) {
  scenario_.validate();
  dynamics_ = scenario_.make_dynamics();
  basis_ = scenario_.make_basis_set();
}

SampleSet SimEngine::build_samples() const {
  return build_sample_set(scenario_.samples.box, scenario_.samples.count,
                          scenario_.samples.strategy, scenario_.samples.seed, *basis_,
                          *dynamics_);
}

Eigen::VectorXd SimEngine::applied_disturbance(double t,
                                               const Eigen::VectorXd& zeta) const {
  const Eigen::VectorXd tau_d = scenario_.disturbance.eval(t);
  if (scenario_.plant_kind != Scenario::PlantKind::auv) return tau_d;
  const PoseState eta = PoseState::from_vector(zeta.head<6>());
  return assemble_J_inverse(eta, scenario_.theta_margin).transpose() * tau_d;
}

Eigen::VectorXd SimEngine::augmented_derivative(const Eigen::VectorXd& x, double t,
                                                SampleSet& samples, bool refresh,
                                                const Eigen::VectorXd& frozen_sum) const {
  const int n = dynamics_->state_dim();
  const int m = basis_->size();

  WeightSet w;
  w.W_bar = scenario_.w_bar;
  w.Wc = x.segment(n, m);
  w.Wa1 = x.segment(n + m, m);
  w.Wa2 = x.segment(n + 2 * m, m);
  const Eigen::VectorXd zeta = x.head(n);

  const AffineDynamics dyn = dynamics_->affine(zeta);
  const Eigen::VectorXd u1 =
      policy_hat(w.Wa1, zeta, *basis_, dyn, scenario_.cost, Player::one);
  const BellmanError live = bellman_error(zeta, w, *basis_, dyn, scenario_.cost);

  Eigen::VectorXd sum;
  if (refresh) {
    refresh_samples(samples, w, scenario_.cost, scenario_.backend);
    sum = sample_gradient_sum(samples, scenario_.backend);
  } else {
    sum = frozen_sum;
  }

  Eigen::VectorXd dx(x.size());
  dx.head(n) = dyn.f + dyn.g * (u1 + applied_disturbance(t, zeta));
  dx.segment(n, m) =
      -scenario_.gains.eta_c * (live.delta / live.p) * live.omega -
      scenario_.gains.eta_c * sum;
  dx.segment(n + m, m) =
      actor_derivative(w.Wa1, w.Wc, scenario_.gains.eta_a1, scenario_.w_bar);
  dx.segment(n + 2 * m, m) =
      actor_derivative(w.Wa2, w.Wc, scenario_.gains.eta_a2, scenario_.w_bar);
  return dx;
}

void SimEngine::step(Eigen::VectorXd& zeta, WeightSet& weights, SampleSet& samples,
                     double t, double dt, bool refresh_in_stages) const {
  const int n = dynamics_->state_dim();
  const int m = basis_->size();

  Eigen::VectorXd x(n + 3 * m);
  x.head(n) = zeta;
  x.segment(n, m) = weights.Wc;
  x.segment(n + m, m) = weights.Wa1;
  x.segment(n + 2 * m, m) = weights.Wa2;

  Eigen::VectorXd frozen_sum;
  if (!refresh_in_stages) frozen_sum = sample_gradient_sum(samples, scenario_.backend);

  const auto rhs = [&](const Eigen::VectorXd& xs, double ts) {
    return augmented_derivative(xs, ts, samples, refresh_in_stages, frozen_sum);
  };

  const Eigen::VectorXd k1 = rhs(x, t);
  const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
  const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
  const Eigen::VectorXd k4 = rhs(x + dt * k3, t + dt);
  x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

  zeta = x.head(n);
  weights.Wc = x.segment(n, m);
  weights.Wa1 = x.segment(n + m, m);
  weights.Wa2 = x.segment(n + 2 * m, m);
  clamp_to_ball(weights.Wa1, scenario_.w_bar);
  clamp_to_ball(weights.Wa2, scenario_.w_bar);
}

TrajectoryLog SimEngine::run() const {
  const int n = dynamics_->state_dim();
  const int k = dynamics_->input_dim();

  TrajectoryLog log;
  log.state_dim = n;
  log.input_dim = k;

  SampleSet samples = build_samples();
  WeightSet weights = initial_weights();
  Eigen::VectorXd zeta = scenario_.initial_state;

  RankReport rank = rank_check(samples, weights, scenario_.cost, scenario_.backend);
  if (rank.rank < basis_->size())
    log.warnings.push_back("sample-set rank " + std::to_string(rank.rank) +
                           " below feature count " + std::to_string(basis_->size()) +
                           " at t=0");

  long steps = std::llround(scenario_.duration / scenario_.dt);
  if (steps < 1) steps = 1;
  if (static_cast<double>(steps) * scenario_.dt <
      scenario_.duration - 1e-9 * std::max(1.0, scenario_.duration))
    ++steps;

  const bool refresh_in_stages = scenario_.samples.refresh_cadence == 1;

  for (long i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * scenario_.dt;

    if (i > 0 && i % scenario_.samples.rank_cadence == 0)
      rank = rank_check(samples, weights, scenario_.cost, scenario_.backend);

    LogRow row;
    row.t = t;
    row.zeta = zeta;
    try {
      const AffineDynamics dyn = dynamics_->affine(zeta);
      row.u1 = policy_hat(weights.Wa1, zeta, *basis_, dyn, scenario_.cost, Player::one);
      row.u2_hat =
          policy_hat(weights.Wa2, zeta, *basis_, dyn, scenario_.cost, Player::two);
      row.delta = bellman_error(zeta, weights, *basis_, dyn, scenario_.cost).delta;
    } catch (const PitchSingularityError& e) {
      log.status = RunStatus::diverged;
      log.divergence_time = t;
      log.divergence_reason = e.what();
      break;
    }
    row.tau_d = scenario_.disturbance.eval(t);
    row.norm_wc = weights.Wc.norm();
    row.norm_wa1 = weights.Wa1.norm();
    row.norm_wa2 = weights.Wa2.norm();
    row.rank = rank.rank;
    row.c_lower = rank.c_lower;
    row.c_upper = rank.c_upper;
    log.rows.push_back(std::move(row));

    if (i == steps) break;

    if (!refresh_in_stages && i % scenario_.samples.refresh_cadence == 0)
      refresh_samples(samples, weights, scenario_.cost, scenario_.backend);

    try {
      step(zeta, weights, samples, t, scenario_.dt, refresh_in_stages);
    } catch (const PitchSingularityError& e) {
      log.status = RunStatus::diverged;
      log.divergence_time = t + scenario_.dt;
      log.divergence_reason = e.what();
      break;
    }

    if (!zeta.allFinite() || zeta.norm() > scenario_.divergence_bound) {
      log.status = RunStatus::diverged;
      log.divergence_time = t + scenario_.dt;
      log.divergence_reason = zeta.allFinite() ? "state norm exceeded divergence bound"
                                               : "non-finite state";
      break;
    }
  }

  log.final_weights = weights;
  return log;
}

std::vector<std::string> TrajectoryLog::csv_header() const {
  std::vector<std::string> h;
  h.push_back("t");
  for (int i = 0; i < state_dim; ++i) h.push_back("zeta_" + std::to_string(i));
  for (int i = 0; i < input_dim; ++i) h.push_back("u1_" + std::to_string(i));
  for (int i = 0; i < input_dim; ++i) h.push_back("u2hat_" + std::to_string(i));
  for (int i = 0; i < input_dim; ++i) h.push_back("taud_" + std::to_string(i));
  h.insert(h.end(), {"delta", "norm_wc", "norm_wa1", "norm_wa2", "rank", "c_lower",
                     "c_upper"});
  return h;
}

void TrajectoryLog::write_csv(std::ostream& out) const {
  const auto header = csv_header();
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.t;
    for (int i = 0; i < state_dim; ++i) out << ',' << r.zeta(i);
    for (int i = 0; i < input_dim; ++i) out << ',' << r.u1(i);
    for (int i = 0; i < input_dim; ++i) out << ',' << r.u2_hat(i);
    for (int i = 0; i < input_dim; ++i) out << ',' << r.tau_d(i);
    out << ',' << r.delta << ',' << r.norm_wc << ',' << r.norm_wa1 << ','
        << r.norm_wa2 << ',' << r.rank << ',' << r.c_lower << ',' << r.c_upper
        << '\n';
  }
}

RunMetrics metrics(const TrajectoryLog& log, const GameCost& cost,
                   const WeightComparison* oracle_comparison) {
  if (log.rows.empty()) throw std::invalid_argument("metrics of an empty log");

  RunMetrics m;
  for (const auto& r : log.rows) {
    m.max_state_norm = std::max(m.max_state_norm, r.zeta.norm());
    m.max_abs_delta = std::max(m.max_abs_delta, std::abs(r.delta));
  }
  m.final_state_norm = log.rows.back().zeta.norm();
  m.final_abs_delta = std::abs(log.rows.back().delta);

  const double t0 = log.rows.front().t, t1 = log.rows.back().t;
  const double tail_start = t1 - 0.2 * (t1 - t0);
  for (const auto& r : log.rows)
    if (r.t >= tail_start - 1e-12)
      m.ultimate_bound_estimate = std::max(m.ultimate_bound_estimate, r.zeta.norm());

  for (std::size_t i = 0; i + 1 < log.rows.size(); ++i) {
    const auto& a = log.rows[i];
    const auto& b = log.rows[i + 1];
    const double ea = a.u1.dot(cost.R * a.u1);
    const double eb = b.u1.dot(cost.R * b.u1);
    m.control_energy += 0.5 * (ea + eb) * (b.t - a.t);
  }

  if (oracle_comparison != nullptr) m.weight_errors = *oracle_comparison;
  return m;
}

}  // namespace stationkeep
