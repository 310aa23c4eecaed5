#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ccep/core/clock.hpp"
#include "ccep/core/event.hpp"
#include "json.hpp"

namespace ccep {

struct TraceHeader {
  std::string input_digest;
  std::uint64_t seed = 0;
  std::string scenario;
  std::string strategy;
  std::uint64_t input_events = 0;
};

/// One bus publication, or a harness-injected fault when kind == "fault".
/// Event records carry the event identity; control records carry the payload.
struct TraceRecord {
  TimeUs t_us = 0;
  std::string topic;
  std::uint64_t offset = 0;
  std::string publisher;
  std::string kind;
  std::string event_id;
  std::string event_type;
  TimeMs occurrence_time = 0;
  nlohmann::json payload;
};

using Detection = std::pair<std::string, std::string>;  // (type, event_id)

struct Trace {
  TraceHeader header;
  std::vector<TraceRecord> records;

  /// Deduplicated derived-event publications.
  std::set<Detection> detections() const;
  std::map<std::string, std::size_t> counts_by_type() const;

  /// Header line, then one record per line.
  void write_jsonl(const std::string& path) const;
  static Trace read_jsonl(const std::string& path);
};

nlohmann::json to_json(const TraceRecord& r);
TraceRecord trace_record_from_json(const nlohmann::json& j);

struct CompareReport {
  bool comparable = true;
  std::string reason;
  std::vector<Detection> only_a;
  std::vector<Detection> only_b;
  /// count_b - count_a for every type where they differ.
  std::map<std::string, long long> count_delta;

  bool empty() const { return comparable && only_a.empty() && only_b.empty(); }
  std::string summary() const;
};

/// Refuses (comparable = false) when the runs consumed different input streams.
CompareReport replay_compare(const Trace& a, const Trace& b);

}  // namespace ccep
