// Serial vs OpenMP backends for the per-sample concurrent-learning kernels.
// The per-sample work is fixed (m = 78 features on the 12-state plant); the
// sample count N is the scaling axis.

#include <benchmark/benchmark.h>

#include "stationkeep/learner.hpp"
#include "stationkeep/vehicle_model.hpp"

using namespace stationkeep;

namespace {

struct Workload {
  QuadraticBasis basis{12};
  AuvDynamics dyn{VehicleParams::generic()};
  GameCost cost;
  WeightSet weights;
  SampleSet samples;

  explicit Workload(int n_samples) {
    Eigen::VectorXd qd(12);
    qd << 1, 1, 1, 1, 1, 1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1;
    cost = GameCost{qd.asDiagonal(), 0.01 * Eigen::MatrixXd::Identity(6, 6),
                    std::sqrt(0.1)};
    Box box;
    box.lo = Eigen::VectorXd::Constant(12, -0.8);
    box.hi = Eigen::VectorXd::Constant(12, 0.8);
    samples = build_sample_set(box, n_samples, SampleStrategy::latin_hypercube, 11,
                               basis, dyn);
    weights.W_bar = 60.0;
    weights.Wc = weights.Wa1 = weights.Wa2 = Eigen::VectorXd::Zero(basis.size());
    for (int i = 0; i < 12; ++i)
      weights.Wc(basis.monomial_index(i, i)) = 2.0;
    weights.Wa1 = weights.Wa2 = weights.Wc;
    refresh_samples(samples, weights, cost);
  }
};

void bm_refresh(benchmark::State& state, Backend backend) {
  Workload w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    refresh_samples(w.samples, w.weights, w.cost, backend);
    benchmark::DoNotOptimize(w.samples.delta.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_gradient_sum(benchmark::State& state, Backend backend) {
  Workload w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Eigen::VectorXd sum = sample_gradient_sum(w.samples, backend);
    benchmark::DoNotOptimize(sum.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void bm_gram(benchmark::State& state, Backend backend) {
  Workload w(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    Eigen::MatrixXd gram = sample_gram(w.samples, backend);
    benchmark::DoNotOptimize(gram.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK_CAPTURE(bm_refresh, serial, Backend::serial)->Arg(312)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_refresh, parallel, Backend::parallel)->Arg(312)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_gradient_sum, serial, Backend::serial)->Arg(312)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_gradient_sum, parallel, Backend::parallel)->Arg(312)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_gram, serial, Backend::serial)->Arg(312)->Arg(1024)->Arg(4096);
BENCHMARK_CAPTURE(bm_gram, parallel, Backend::parallel)->Arg(312)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
