// Micro-benchmarks for the hot loops: Lanczos, free energy, Gibbs, CD-k,
// local energies.

#include "rbmscale/estimator.hpp"
#include "rbmscale/rbm.hpp"
#include "rbmscale/rng.hpp"
#include "rbmscale/tfim.hpp"

#include <benchmark/benchmark.h>

using namespace rbmscale;

namespace {

Eigen::MatrixXd random_bits(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  return m;
}

void BM_GroundState(benchmark::State& state) {
  const TfimSpec spec = TfimSpec::from_ratio(static_cast<int>(state.range(0)), 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_ground_state(spec).energy);
}
BENCHMARK(BM_GroundState)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

void BM_FreeEnergy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RbmParams p = RbmParams::random(n, n / 2, 0.1, 7);
  Rng rng(1);
  const Eigen::MatrixXd v = random_bits(1, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(free_energy(p, v.row(0).transpose()));
}
BENCHMARK(BM_FreeEnergy)->Arg(10)->Arg(16);

void BM_GibbsSweep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RbmParams p = RbmParams::random(n, n / 2, 0.1, 7);
  Rng rng(2);
  Eigen::MatrixXd chains = random_bits(100, n, rng);
  for (auto _ : state) {
    gibbs_sweep(p, chains, rng);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * chains.rows());
}
BENCHMARK(BM_GibbsSweep)->Arg(10)->Arg(16);

void BM_CdGradient(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RbmParams p = RbmParams::random(n, n / 2, 0.1, 7);
  Rng rng(3);
  const Eigen::MatrixXd batch = random_bits(100, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cd_gradient(p, batch, 1, rng));
}
BENCHMARK(BM_CdGradient)->Arg(10)->Arg(16);

void BM_LocalEnergies(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const RbmParams p = RbmParams::random(n, n / 2, 0.1, 7);
  const TfimSpec spec = TfimSpec::from_ratio(n, 1.0);
  Rng rng(4);
  const Eigen::MatrixXd samples = random_bits(1000, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(local_energies(p, spec, samples));
  state.SetItemsProcessed(state.iterations() * samples.rows());
}
BENCHMARK(BM_LocalEnergies)->Arg(10)->Arg(16);

void BM_TrainEpoch(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(5);
  TrainConfig tc;
  Trainer trainer(RbmParams::random(n, n / 2, 0.01, 7), random_bits(10000, n, rng), tc);
  for (auto _ : state) trainer.run_epochs(1);
}
BENCHMARK(BM_TrainEpoch)->Arg(10)->Arg(16)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
