#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ccep/core/event.hpp"

namespace ccep {

using Bytes = std::vector<std::uint8_t>;

/// Buffered context of one stateful event type, keyed by partition id.
struct ContextState {
  std::string owner_type;
  std::map<std::string, std::vector<Event>> partitions;
  /// Largest occurrence_time accepted so far; -1 before the first event.
  TimeMs max_seen_time = -1;
  /// Watermark at which stale partitions were last swept.
  TimeMs sweep_mark = -1;
  std::uint64_t late_dropped = 0;

  std::size_t buffered_count() const;
  bool operator==(const ContextState&) const = default;
};

nlohmann::json to_json(const ContextState& s);
ContextState context_state_from_json(const nlohmann::json& j);

/// CBOR body behind a 4-byte magic. deserialize_state throws DecodeError.
Bytes serialize_state(const ContextState& s);
ContextState deserialize_state(std::span<const std::uint8_t> bytes);

}  // namespace ccep
