#include <benchmark/benchmark.h>

#include "symq/discipline.hpp"
#include "symq/engine.hpp"
#include "symq/replicate.hpp"
#include "symq/service_dist.hpp"

namespace {

// One replication: queue length at t = 200 for PS, exponential service, rho = 0.9.
std::size_t one_run(std::size_t, symq::Rng& rng) {
  static const auto d = symq::Discipline::ps();
  static const auto sd = symq::ServiceDistribution::exponential(1.0);
  const std::vector<double> grid{200.0};
  const auto path = symq::simulate(d, sd, 0.9, 200.0, grid, rng);
  return path.queue_length.back();
}

void BM_ReplicateSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    auto out = symq::parallel::replicate_serial<std::size_t>(n, 1, 0, one_run);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_ReplicateParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const int threads = symq::parallel::default_threads();
  for (auto _ : state) {
    auto out = symq::parallel::replicate<std::size_t>(n, 1, 0, one_run, threads);
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["threads"] = threads;
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_ReplicateSerial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ReplicateParallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
