#include "ccep/harness/batch.hpp"

#include <exception>

namespace ccep {

namespace {

BatchOutcome run_one(const BatchItem& item) {
  BatchOutcome o;
  try {
    auto run = run_scenario(item.config);
    o.run = run.summary;
    o.sessions = relocation_sessions(run.trace);
    o.gaps = recovery_gaps(run.trace);
    if (item.with_reference) {
      auto ref = run_scenario(reference_of(item.config));
      o.reference = ref.summary;
      o.diff = replay_compare(ref.trace, run.trace);
    }
  } catch (const std::exception& ex) {
    o.error = ex.what();
  }
  return o;
}

}  // namespace

std::vector<BatchOutcome> run_batch(const std::vector<BatchItem>& items, bool parallel) {
  std::vector<BatchOutcome> out(items.size());
  const long n = static_cast<long>(items.size());
  if (!parallel) {
    for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_one(items[static_cast<std::size_t>(i)]);
    return out;
  }
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = run_one(items[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<BatchItem> seed_sweep(const ScenarioConfig& base, std::uint64_t first_seed, std::size_t n,
                                  bool with_reference) {
  std::vector<BatchItem> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto c = base;
    c.seed = first_seed + i;
    c.worker.seed = c.seed;
    c.name = base.name + "-s" + std::to_string(c.seed);
    out.push_back({c, with_reference});
  }
  return out;
}

}  // namespace ccep
