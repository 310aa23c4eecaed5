#include "ccep/core/context_state.hpp"

#include <algorithm>
#include <array>

#include "ccep/core/error.hpp"

namespace ccep {

namespace {
constexpr std::array<std::uint8_t, 4> kMagic{'C', 'C', 'S', '1'};
}

std::size_t ContextState::buffered_count() const {
  std::size_t n = 0;
  for (const auto& [_, buf] : partitions) n += buf.size();
  return n;
}

nlohmann::json to_json(const ContextState& s) {
  auto parts = nlohmann::json::object();
  for (const auto& [pid, buf] : s.partitions) {
    auto arr = nlohmann::json::array();
    for (const auto& e : buf) arr.push_back(to_json(e));
    parts[pid] = std::move(arr);
  }
  return nlohmann::json{{"owner_type", s.owner_type},
                        {"max_seen_time", s.max_seen_time},
                        {"sweep_mark", s.sweep_mark},
                        {"late_dropped", s.late_dropped},
                        {"buffered_count", s.buffered_count()},
                        {"partitions", std::move(parts)}};
}

ContextState context_state_from_json(const nlohmann::json& j) {
  ContextState s;
  try {
    s.owner_type = j.at("owner_type").get<std::string>();
    s.max_seen_time = j.at("max_seen_time").get<TimeMs>();
    s.sweep_mark = j.value("sweep_mark", TimeMs{-1});
    s.late_dropped = j.value("late_dropped", std::uint64_t{0});
    for (const auto& [pid, arr] : j.at("partitions").items()) {
      auto& buf = s.partitions[pid];
      for (const auto& ej : arr) buf.push_back(event_from_json(ej));
    }
    if (j.at("buffered_count").get<std::size_t>() != s.buffered_count())
      throw DecodeError("buffered_count does not match partition contents");
  } catch (const nlohmann::json::exception& ex) {
    throw DecodeError(std::string("bad context state: ") + ex.what());
  }
  return s;
}

Bytes serialize_state(const ContextState& s) {
  Bytes out(kMagic.begin(), kMagic.end());
  nlohmann::json::to_cbor(to_json(s), out);
  return out;
}

ContextState deserialize_state(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw DecodeError("context state: bad magic");
  auto j = nlohmann::json::from_cbor(bytes.begin() + kMagic.size(), bytes.end(), true, false);
  if (j.is_discarded()) throw DecodeError("context state: malformed CBOR body");
  return context_state_from_json(j);
}

}  // namespace ccep
