#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccep/harness/trace.hpp"

namespace ccep {

/// Time from a worker kill to the first assignment_update moving one of its
/// types to another worker. `recovered_at` is empty if that never happened.
struct RecoveryGap {
  std::string worker;
  std::string event_type;
  TimeUs killed_at = 0;
  std::optional<TimeUs> recovered_at;
  std::string new_owner;

  std::optional<TimeUs> gap() const {
    if (!recovered_at) return std::nullopt;
    return *recovered_at - killed_at;
  }
};

std::vector<RecoveryGap> recovery_gaps(const Trace& trace);

/// A relocation session observed in the trace: from its snapshot request to
/// its last handover_phase (or last message naming it).
struct SessionSpan {
  std::string session_id;
  TimeUs started = 0;
  TimeUs ended = 0;
  bool completed = false;
  /// Catalog publications inside [started, ended].
  std::vector<TraceRecord> catalog_messages;
};

std::vector<SessionSpan> relocation_sessions(const Trace& trace);

}  // namespace ccep
