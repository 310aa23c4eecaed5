#include "ccep/core/event.hpp"

#include <cstdio>

#include "ccep/core/error.hpp"

namespace ccep {

nlohmann::json to_json(const Event& e) {
  return nlohmann::json{{"event_type", e.event_type},
                        {"event_id", e.event_id},
                        {"occurrence_time", e.occurrence_time},
                        {"source_id", e.source_id},
                        {"attributes", to_json(e.attributes)}};
}

Event event_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DecodeError("event must be a JSON object");
  Event e;
  try {
    e.event_type = j.at("event_type").get<std::string>();
    e.event_id = j.at("event_id").get<std::string>();
    e.occurrence_time = j.at("occurrence_time").get<TimeMs>();
    e.source_id = j.value("source_id", std::string{});
  } catch (const nlohmann::json::exception& ex) {
    throw DecodeError(std::string("bad event field: ") + ex.what());
  }
  if (e.event_type.empty()) throw DecodeError("event_type must be non-empty");
  if (e.event_id.empty()) throw DecodeError("event_id must be non-empty");
  if (e.occurrence_time < 0) throw DecodeError("occurrence_time must be non-negative");
  if (auto it = j.find("attributes"); it != j.end()) e.attributes = attributes_from_json(*it);
  return e;
}

std::string to_wire(const Event& e) { return to_json(e).dump(); }

Event parse_wire(std::string_view line) {
  auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) throw DecodeError("event line is not valid JSON");
  return event_from_json(j);
}

std::string derived_event_id(std::string_view type_name, std::string_view trigger_id,
                             std::uint64_t ordinal) {
  // FNV-1a, 64 bit.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  mix(type_name);
  mix(trigger_id);
  mix(std::to_string(ordinal));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(type_name) + ":" + buf;
}

}  // namespace ccep
