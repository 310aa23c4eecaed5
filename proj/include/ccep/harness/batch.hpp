#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccep/harness/checks.hpp"
#include "ccep/harness/simulation.hpp"

namespace ccep {

struct BatchItem {
  ScenarioConfig config;
  /// Also run the fault-free single-worker baseline and diff against it.
  bool with_reference = true;
};

struct BatchOutcome {
  RunSummary run;
  RunSummary reference;
  CompareReport diff;
  /// Non-empty if the run threw.
  std::string error;
  std::vector<SessionSpan> sessions;
  std::vector<RecoveryGap> gaps;
};

/// Runs every item, one independent simulation per iteration. With
/// `parallel` the items are spread over OpenMP threads; otherwise they run
/// in order on the calling thread. Results are in item order either way.
std::vector<BatchOutcome> run_batch(const std::vector<BatchItem>& items, bool parallel);

/// Copies of `base` with seeds first_seed, first_seed + 1, ...
std::vector<BatchItem> seed_sweep(const ScenarioConfig& base, std::uint64_t first_seed, std::size_t n,
                                  bool with_reference = true);

}  // namespace ccep
