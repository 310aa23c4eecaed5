#include "ccep/harness/checks.hpp"

#include <map>

namespace ccep {

std::vector<RecoveryGap> recovery_gaps(const Trace& trace) {
  std::vector<RecoveryGap> out;
  for (const auto& r : trace.records) {
    if (r.kind != "fault" || r.payload.value("action", "") != "kill") continue;
    auto worker = r.payload.value("worker", "");
    for (const auto& t : r.payload.value("types", std::vector<std::string>{}))
      out.push_back({worker, t, r.t_us, std::nullopt, ""});
  }
  for (auto& g : out) {
    for (const auto& r : trace.records) {
      if (r.t_us < g.killed_at || r.kind != "assignment_update") continue;
      if (r.payload.value("event_type", "") != g.event_type) continue;
      auto w = r.payload.value("worker_id", "");
      if (w == g.worker) continue;
      g.recovered_at = r.t_us;
      g.new_owner = w;
      break;
    }
  }
  return out;
}

std::vector<SessionSpan> relocation_sessions(const Trace& trace) {
  std::map<std::string, SessionSpan> spans;
  for (const auto& r : trace.records) {
    if (r.kind == "snapshot_request") {
      auto id = r.payload.value("request_id", "");
      auto& s = spans[id];
      s.session_id = id;
      s.started = s.ended = r.t_us;
      continue;
    }
    if (r.kind != "relocation_proposal" && r.kind != "proposal_response" && r.kind != "handover_phase") continue;
    auto it = spans.find(r.payload.value("session_id", ""));
    if (it == spans.end()) continue;
    it->second.ended = std::max(it->second.ended, r.t_us);
    if (r.kind == "handover_phase" && r.payload.value("phase", "") == "COMPLETED") it->second.completed = true;
  }
  for (const auto& r : trace.records) {
    if (r.publisher != "catalog") continue;
    for (auto& [_, s] : spans)
      if (r.t_us >= s.started && r.t_us <= s.ended) s.catalog_messages.push_back(r);
  }
  std::vector<SessionSpan> out;
  for (auto& [_, s] : spans) out.push_back(std::move(s));
  return out;
}

}  // namespace ccep
