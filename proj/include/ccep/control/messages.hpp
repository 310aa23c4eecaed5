#pragma once

// Choreography messages exchanged on "ctl." topics. Every payload is one JSON
// object whose "kind" field names the message.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "ccep/core/clock.hpp"

namespace ccep::control {

inline const std::string kHeartbeatTopic = "ctl.heartbeat";
inline const std::string kLoadsTopic = "ctl.loads";
inline const std::string kAssignTopic = "ctl.assign";
inline const std::string kCatalogTopic = "ctl.catalog";
inline std::string worker_topic(const std::string& worker_id) { return "ctl.worker." + worker_id; }

enum class Lifecycle { Starting, Active, Draining, Terminated };
enum class Phase { Proposed, StateTransferred, DualDetection, Acknowledged, Completed, Aborted };

std::string to_string(Lifecycle l);
std::string to_string(Phase p);

NLOHMANN_JSON_SERIALIZE_ENUM(Lifecycle, {{Lifecycle::Starting, "STARTING"},
                                         {Lifecycle::Active, "ACTIVE"},
                                         {Lifecycle::Draining, "DRAINING"},
                                         {Lifecycle::Terminated, "TERMINATED"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Phase, {{Phase::Proposed, "PROPOSED"},
                                     {Phase::StateTransferred, "STATE_TRANSFERRED"},
                                     {Phase::DualDetection, "DUAL_DETECTION"},
                                     {Phase::Acknowledged, "ACKNOWLEDGED"},
                                     {Phase::Completed, "COMPLETED"},
                                     {Phase::Aborted, "ABORTED"}})

struct Heartbeat {
  static constexpr const char* kKind = "heartbeat";
  std::string worker_id;
  TimeUs at = 0;
  Lifecycle lifecycle = Lifecycle::Active;
  std::size_t n_types = 0;
};

/// Sent on ctl.loads; replies go to the requester's worker topic.
struct SnapshotRequest {
  static constexpr const char* kKind = "snapshot_request";
  std::string request_id;
  std::string from;
};

struct LoadSnapshot {
  static constexpr const char* kKind = "load_snapshot";
  std::string request_id;
  std::string worker_id;
  double F = 0;
  double IC = 0;
  std::size_t n_types = 0;
  Lifecycle lifecycle = Lifecycle::Active;
  TimeUs timestamp = 0;
  /// Holding a relocation role right now.
  bool busy = false;
};

struct TypeTransfer {
  nlohmann::json definition;
  double flow = 0;
  double consumption = 0;
  std::uint64_t epoch = 0;
  bool notify = false;
  /// Source-side flow estimate of each input topic.
  std::map<std::string, double> topic_flows;
};

struct RelocationProposal {
  static constexpr const char* kKind = "relocation_proposal";
  std::string session_id;
  std::string source;
  std::string target;
  std::vector<TypeTransfer> types;
  double need = 0;
  bool scale_in = false;
  /// The target was started for this proposal and accepts regardless of load.
  bool spawned = false;
};

struct ProposalResponse {
  static constexpr const char* kKind = "proposal_response";
  std::string session_id;
  std::string from;
  std::string to;
  bool accepted = false;
  std::string reason;
};

struct HandoverPhase {
  static constexpr const char* kKind = "handover_phase";
  std::string session_id;
  std::string event_type;
  std::string from;
  std::string to;
  Phase phase = Phase::Proposed;
  std::uint64_t checkpoint_version = 0;
  std::uint64_t buffered_count = 0;
  std::string reason;
};

struct AssignmentRequest {
  static constexpr const char* kKind = "assignment_request";
  std::string request_id;
  std::string event_type;
  nlohmann::json definition;
  std::uint64_t epoch = 0;
  std::string reason;
  std::string failed_worker;
  bool notify = false;
  /// Where detection starts when no checkpoint exists.
  std::map<std::string, std::uint64_t> start_offsets;
};

struct AssignmentUpdate {
  static constexpr const char* kKind = "assignment_update";
  std::string event_type;
  std::string worker_id;
  std::string previous_worker;
  std::uint64_t epoch = 0;
  std::string reason;
};

struct DefinitionUpdate {
  static constexpr const char* kKind = "definition_update";
  std::string event_type;
  nlohmann::json definition;
  std::uint64_t version = 0;
  bool notify = false;
  std::string worker_id;
};

struct TypeDeleted {
  static constexpr const char* kKind = "type_deleted";
  std::string event_type;
  std::string worker_id;
};

/// Worker to catalog: a detection of a type with webhooks.
struct Detection {
  static constexpr const char* kKind = "detection";
  std::string event_type;
  nlohmann::json event;
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Heartbeat, worker_id, at, lifecycle, n_types)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SnapshotRequest, request_id, from)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(LoadSnapshot, request_id, worker_id, F, IC, n_types, lifecycle,
                                                timestamp, busy)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TypeTransfer, definition, flow, consumption, epoch, notify,
                                                topic_flows)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RelocationProposal, session_id, source, target, types, need,
                                                scale_in, spawned)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(ProposalResponse, session_id, from, to, accepted, reason)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(HandoverPhase, session_id, event_type, from, to, phase,
                                                checkpoint_version, buffered_count, reason)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AssignmentRequest, request_id, event_type, definition, epoch,
                                                reason, failed_worker, notify, start_offsets)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AssignmentUpdate, event_type, worker_id, previous_worker, epoch,
                                                reason)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(DefinitionUpdate, event_type, definition, version, notify,
                                                worker_id)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(TypeDeleted, event_type, worker_id)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Detection, event_type, event)

template <typename Msg>
std::string encode(const Msg& m) {
  nlohmann::json j = m;
  j["kind"] = Msg::kKind;
  return j.dump();
}

/// Parsed control payload. Throws DecodeError on malformed JSON or a missing kind.
struct Envelope {
  std::string kind;
  nlohmann::json body;

  template <typename Msg>
  Msg as() const {
    return body.get<Msg>();
  }
};

Envelope decode(const std::string& payload);

}  // namespace ccep::control
