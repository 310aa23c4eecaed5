#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "ccep/core/value.hpp"

namespace ccep {

/// Milliseconds since epoch.
using TimeMs = std::int64_t;

struct Event {
  std::string event_type;
  std::string event_id;
  TimeMs occurrence_time = 0;
  std::string source_id;
  Attributes attributes;

  bool operator==(const Event&) const = default;
};

nlohmann::json to_json(const Event& e);
Event event_from_json(const nlohmann::json& j);

/// One JSON object per line: {"event_type","event_id","occurrence_time",
/// "source_id","attributes"}.
std::string to_wire(const Event& e);
Event parse_wire(std::string_view line);

/// Deterministic id for a derived event: a hash of the deriving type, the
/// triggering input id and the emission ordinal.
std::string derived_event_id(std::string_view type_name, std::string_view trigger_id,
                             std::uint64_t ordinal);

}  // namespace ccep
