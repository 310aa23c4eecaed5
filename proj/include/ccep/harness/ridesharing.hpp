#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ccep/core/definition.hpp"
#include "ccep/core/event.hpp"
#include "ccep/harness/scenario.hpp"

namespace ccep {

/// Producer-fed types, definitions in dependency order, and the input stream.
struct Workload {
  std::vector<std::string> primitives;
  std::vector<EventTypeDefinition> definitions;
  /// Sorted by (occurrence_time, event_id).
  std::vector<Event> events;
};

std::vector<std::string> ridesharing_primitives();

/// Enrichment table rows are derived from `seed`, one per client "c0".."c{n-1}".
std::vector<EventTypeDefinition> build_ridesharing_catalog(int n_clients, std::uint64_t seed);

/// Poisson ride arrivals following the ramp; each ride fans out into driver
/// responses, trip phases and a rating. Stops at `max_events` if set.
std::vector<Event> generate_ridesharing(const ScenarioConfig& cfg);

Workload ridesharing_workload(const ScenarioConfig& cfg);

/// Hash of the wire form of every input event, in order.
std::string input_digest(const std::vector<Event>& events);

}  // namespace ccep
