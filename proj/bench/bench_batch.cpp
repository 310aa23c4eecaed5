// Serial loop vs OpenMP over the same batch of independent simulations.
#include <benchmark/benchmark.h>
#include <omp.h>

#include "ccep/harness/batch.hpp"

using namespace ccep;

namespace {

std::vector<BatchItem> items(std::size_t n) {
  ScenarioConfig c;
  c.name = "bench";
  c.duration_s = 60;
  c.tail_s = 60;
  c.ramp = {{0, 40}};
  c.initial_workers = 2;
  c.max_workers = 4;
  c.worker.autonomous = false;
  c.faults.push_back({20, FaultAction::Kind::Relocate, "", {"EnrichedRideCall"}, {}});
  return seed_sweep(c, 1, n, false);
}

void run(benchmark::State& state, bool parallel) {
  auto batch = items(static_cast<std::size_t>(state.range(0)));
  std::uint64_t detections = 0;
  for (auto _ : state) {
    auto out = run_batch(batch, parallel);
    for (const auto& o : out) detections += o.run.detections;
    benchmark::DoNotOptimize(detections);
  }
  state.counters["threads"] = parallel ? omp_get_max_threads() : 1;
  state.counters["runs/s"] = benchmark::Counter(static_cast<double>(batch.size()) * state.iterations(),
                                                benchmark::Counter::kIsRate);
}

void BM_BatchSerial(benchmark::State& state) { run(state, false); }
void BM_BatchOpenMP(benchmark::State& state) { run(state, true); }

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BatchOpenMP)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
