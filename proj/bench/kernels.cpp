// Serial reference path against the OpenMP path for the ensemble kernels.
// The second argument of every benchmark is the worker count; 0 selects the
// serial path.

#include <benchmark/benchmark.h>

#include "ergolab/deviations.hpp"
#include "ergolab/entropy.hpp"
#include "ergolab/historical.hpp"
#include "ergolab/parallel.hpp"
#include "ergolab/stochastics.hpp"

namespace {

using namespace ergolab;

Exec configure(const benchmark::State& state) {
  const auto workers = static_cast<int>(state.range(0));
  set_worker_count(workers == 0 ? 1 : workers);
  return workers == 0 ? Exec::serial : Exec::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "parallel");
  set_worker_count(0);
}

void BM_GreenKubo(benchmark::State& state) {
  const auto exec = configure(state);
  const auto spec = SystemSpec::default2d();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_sigma_green_kubo(spec, 20, 100000, 1, exec).value);
  state.SetItemsProcessed(state.iterations() * 100000 * 21);
  label(state);
}

void BM_VarianceEnsemble(benchmark::State& state) {
  const auto exec = configure(state);
  const auto spec = SystemSpec::default2d();
  for (auto _ : state) benchmark::DoNotOptimize(estimate_sigma_variance(spec, 10000, 200, 1, exec).value);
  state.SetItemsProcessed(state.iterations() * 10000 * 200);
  label(state);
}

void BM_CltPaths(benchmark::State& state) {
  const auto exec = configure(state);
  const auto spec = SystemSpec::default2d();
  for (auto _ : state) benchmark::DoNotOptimize(sample_clt_paths(spec, 10000, 100, kDefaultSigma, 100, 1, exec));
  state.SetItemsProcessed(state.iterations() * 10000 * 100);
  label(state);
}

void BM_DeviantFraction(benchmark::State& state) {
  const auto exec = configure(state);
  const auto spec = SystemSpec::default2d();
  EnsembleSpec ensemble;
  ensemble.count = 40000;
  for (auto _ : state)
    benchmark::DoNotOptimize(deviant_fraction(spec, ensemble, spec.phi, {0.0, 0.0}, 0.1, {10, 50, 100}, exec));
  state.SetItemsProcessed(state.iterations() * 40000 * 100);
  label(state);
}

void BM_SeparatedSet(benchmark::State& state) {
  const auto exec = configure(state);
  const auto disc = unstable_segment(SystemSpec::default2d(), {{0.3183098861837907, 0.5772156649015329}, 0.0}, 1e-3);
  for (auto _ : state) benchmark::DoNotOptimize(max_separated_set(disc, 10, 0.02, exec).cardinality());
  label(state);
}

void BM_HistoricalEnsemble(benchmark::State& state) {
  const auto exec = configure(state);
  const auto spec = SystemSpec::default3d();
  for (auto _ : state) benchmark::DoNotOptimize(scan_ensemble(spec, 8, 1, 100000, false, exec));
  state.SetItemsProcessed(state.iterations() * 8 * 100000);
  label(state);
}

void workers(benchmark::internal::Benchmark* b) {
  b->Arg(0)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
}

BENCHMARK(BM_GreenKubo)->Apply(workers);
BENCHMARK(BM_VarianceEnsemble)->Apply(workers);
BENCHMARK(BM_CltPaths)->Apply(workers);
BENCHMARK(BM_DeviantFraction)->Apply(workers);
BENCHMARK(BM_SeparatedSet)->Apply(workers);
BENCHMARK(BM_HistoricalEnsemble)->Apply(workers);

}  // namespace

BENCHMARK_MAIN();
