#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccep/bus/bus.hpp"
#include "ccep/control/messages.hpp"
#include "ccep/control/runtime.hpp"
#include "ccep/core/evaluator.hpp"
#include "ccep/statestore/checkpoint.hpp"
#include "ccep/statestore/store.hpp"
#include "ccep/worker/relocation.hpp"

namespace ccep {

struct WorkerConfig {
  Strategy strategy = Strategy::InputSimilarity;
  /// events/second
  double max_flow = 70;
  double min_flow = 25;
  /// resource units
  double max_resource = 5000;
  TimeUs monitor_period_us = 1'000'000;
  TimeUs flow_window_us = 5'000'000;
  TimeUs heartbeat_us = 500'000;
  int missed_heartbeats = 3;
  std::size_t comparison_window = 10;
  TimeUs handover_timeout_us = 30'000'000;
  /// A type still short of comparison_window outputs after this long in dual
  /// detection is acknowledged if every source output so far was matched.
  TimeUs comparison_timeout_us = 10'000'000;
  std::size_t checkpoint_interval = 100;
  std::size_t recent_ids = 4096;
  /// Monitor periods without relocation decisions after a session ends.
  int cooldown_periods = 5;
  /// Scale-in only targets workers that stay under this fraction of the threshold.
  double scale_in_headroom = 0.8;
  /// Monitor periods a worker without types waits before leaving.
  int idle_periods_before_exit = 3;
  TimeUs assign_wait_us = 100'000;
  TimeUs proposal_timeout_us = 2'000'000;
  TimeUs store_retry_us = 10'000;
  /// Modeled processing cost of one input event for one type.
  TimeUs eval_cost_us = 200;
  /// Automatic relocation and scale-in; forced relocations work regardless.
  bool autonomous = true;
  std::uint64_t seed = 1;
};

enum class MonitorAction { None, Relocate, ScaleIn, Exit };

struct WorkerStats {
  std::uint64_t processed = 0;
  std::uint64_t duplicates_skipped = 0;
  std::uint64_t evaluation_errors = 0;
  std::uint64_t published = 0;
  std::uint64_t checkpoints = 0;
  std::uint64_t deferrals = 0;
  std::uint64_t sessions_started = 0;
  std::uint64_t handovers_completed = 0;
  std::uint64_t handovers_aborted = 0;
  std::uint64_t claims = 0;
};

/// Bounded set of recently seen ids, oldest evicted first.
class RecentIds {
 public:
  explicit RecentIds(std::size_t cap = 4096) : cap_(cap) {}
  /// False if already present.
  bool insert(const std::string& id);
  bool contains(const std::string& id) const { return set_.count(id) != 0; }
  std::vector<std::string> items() const { return {order_.begin(), order_.end()}; }
  void assign(const std::vector<std::string>& ids);

 private:
  std::size_t cap_;
  std::deque<std::string> order_;
  std::unordered_set<std::string> set_;
};

/// One CEP worker: detects its assigned types, samples its own load every
/// monitor period and relocates types to peers over the control topics.
class Worker {
 public:
  Worker(std::string id, Bus& bus, StateStore& store, Runtime& runtime, WorkerConfig config);
  ~Worker();

  Worker(const Worker&) = delete;
  Worker& operator=(const Worker&) = delete;

  /// Subscribes to the control topics, emits a first heartbeat and snapshot-ready state.
  void start();
  /// Stops abruptly: no final messages, subscriptions dropped.
  void crash();

  /// Starts a relocation of the given owned types outside the monitor's
  /// control. Returns false if the worker is busy or does not own them.
  bool force_relocation(const std::vector<std::string>& types);

  const std::string& id() const { return id_; }
  control::Lifecycle lifecycle() const { return lifecycle_; }
  bool alive() const { return alive_; }
  /// Owned types, excluding ones still arriving through a handover.
  std::vector<std::string> types() const;
  /// Types currently evaluated here, including provisional ones.
  std::vector<std::string> detecting() const;
  std::set<std::string> input_event_types() const;
  bool busy() const { return out_.has_value() || in_.has_value(); }

  /// Σ flow over distinct input topics, events/second.
  double flow() const;
  double type_flow(const std::string& type) const;
  /// Σ per-type consumption read back from the store.
  double instance_consumption();
  double consumption(const std::string& type);
  control::LoadSnapshot snapshot(const std::string& request_id);
  std::size_t alive_workers() const;

  /// Decision the monitor would take now, without acting.
  MonitorAction monitor_decision(std::vector<std::string>* relocate = nullptr);
  const WorkerStats& stats() const { return stats_; }

 private:
  struct TypeRuntime {
    std::unique_ptr<Evaluator> evaluator;
    ContextState state;
    std::map<std::string, std::uint64_t> next_offsets;
    RecentIds recent;
    std::uint64_t epoch = 0;
    bool notify = false;
    /// Arriving through a handover and not yet acknowledged.
    bool provisional = false;
    std::size_t since_checkpoint = 0;
    std::map<std::string, SubscriptionId> subscriptions;
  };

  struct TypeSession {
    control::Phase phase = control::Phase::Proposed;
    std::uint64_t buffered_at_checkpoint = 0;
    std::vector<std::string> source_outputs;
    std::set<std::string> target_outputs;
    std::size_t target_count = 0;
    std::optional<SubscriptionId> observer;
  };

  struct Outgoing {
    enum class Stage { Collecting, Proposed, Handover } stage = Stage::Collecting;
    std::string session_id;
    std::string target;
    std::vector<std::string> types;
    bool scale_in = false;
    bool spawned = false;
    std::vector<control::LoadSnapshot> snapshots;
    std::vector<std::string> refused;
    double need = 0;
    std::map<std::string, TypeSession> sessions;
  };

  struct Incoming {
    std::string session_id;
    std::string source;
    std::map<std::string, control::TypeTransfer> types;
    std::map<std::string, control::Phase> phases;
  };

  struct PendingAssignment {
    control::AssignmentRequest request;
    std::vector<control::LoadSnapshot> snapshots;
  };

  // message plumbing
  void on_control(const Delivery& d);
  void on_input(const std::string& type, const Delivery& d);
  void on_observed_output(const std::string& type, const Delivery& d);
  template <typename Msg>
  void send(const std::string& topic, const Msg& m);
  void schedule_in(TimeUs delay, std::function<void()> fn);

  // detection
  void install_type(const std::string& name, const EventTypeDefinition& def, std::optional<TypeCheckpoint> cp,
                    const std::map<std::string, std::uint64_t>& start_offsets, std::uint64_t epoch, bool notify,
                    bool provisional);
  void drop_type(const std::string& name);
  void publish_output(const std::string& type, Event out);
  void checkpoint(const std::string& type, std::function<void(std::uint64_t version)> then = {});
  void count_topic(const std::string& topic, std::uint64_t offset);

  // periodic work
  void heartbeat_tick();
  void monitor_tick();
  void sample_flows();
  void check_peers();
  bool peer_alive(const std::string& id) const;

  // assignment
  void on_assignment_request(const control::AssignmentRequest& req);
  void on_assignment_snapshot(const control::LoadSnapshot& s);
  void decide_assignment(const std::string& request_id);
  void on_assignment_update(const control::AssignmentUpdate& u);

  // relocation, source side
  void start_relocation(std::vector<std::string> types, bool scale_in);
  void choose_and_propose();
  void propose(const std::string& target, bool spawned);
  void on_proposal_response(const control::ProposalResponse& r);
  void begin_handover();
  void on_target_phase(const control::HandoverPhase& p);
  void check_match(const std::string& type);
  void acknowledge(const std::string& type);
  void abort_type(const std::string& type, const std::string& reason, bool finish = true);
  void maybe_finish_outgoing();
  void cancel_outgoing(const std::string& reason);

  // relocation, target side
  void on_proposal(const control::RelocationProposal& p);
  void on_source_phase(const control::HandoverPhase& p);
  void load_transferred(const std::string& session_id, const std::string& type, std::uint64_t version,
                        TimeUs deadline);
  void discard_incoming(const std::string& type, const std::string& reason, bool tell_source, bool finish = true);
  void maybe_finish_incoming();

  void terminate();

  std::string id_;
  Bus& bus_;
  StoreClient store_;
  Runtime& runtime_;
  WorkerConfig config_;
  std::mt19937_64 rng_;

  control::Lifecycle lifecycle_ = control::Lifecycle::Starting;
  bool alive_ = true;
  std::vector<SubscriptionId> control_subs_;
  std::map<std::string, TypeRuntime> types_;

  // flow accounting per input topic
  std::map<std::string, double> topic_flow_;
  std::map<std::string, std::uint64_t> topic_count_;
  std::map<std::string, std::uint64_t> topic_seen_offset_;
  std::shared_ptr<const Message> parsed_msg_;
  Event parsed_event_;
  TimeUs busy_until_ = 0;

  std::map<std::string, std::pair<TimeUs, control::Lifecycle>> peers_;
  std::map<std::string, PendingAssignment> assignments_;
  std::set<std::string> seen_requests_;

  std::optional<Outgoing> out_;
  std::optional<Incoming> in_;
  std::uint64_t session_counter_ = 0;
  int cooldown_ = 0;
  int idle_periods_ = 0;
  WorkerStats stats_;
};

}  // namespace ccep
