#include "ccep/worker/worker.hpp"

#include <algorithm>
#include <functional>

#include "ccep/core/error.hpp"

namespace ccep {

using namespace control;

bool RecentIds::insert(const std::string& id) {
  if (!set_.insert(id).second) return false;
  order_.push_back(id);
  while (order_.size() > cap_) {
    set_.erase(order_.front());
    order_.pop_front();
  }
  return true;
}

void RecentIds::assign(const std::vector<std::string>& ids) {
  order_.clear();
  set_.clear();
  for (const auto& id : ids) insert(id);
}

Worker::Worker(std::string id, Bus& bus, StateStore& store, Runtime& runtime, WorkerConfig config)
    : id_(std::move(id)),
      bus_(bus),
      store_(store, id_),
      runtime_(runtime),
      config_(config),
      rng_(config.seed ^ std::hash<std::string>{}(id_)) {}

Worker::~Worker() = default;

template <typename Msg>
void Worker::send(const std::string& topic, const Msg& m) {
  bus_.publish(topic, encode(m), id_);
}

void Worker::schedule_in(TimeUs delay, std::function<void()> fn) {
  runtime_.schedule(runtime_.now() + delay, id_, std::move(fn));
}

void Worker::start() {
  auto h = [this](const Delivery& d) { on_control(d); };
  control_subs_.push_back(bus_.subscribe(worker_topic(id_), id_, h));
  control_subs_.push_back(bus_.subscribe(kLoadsTopic, id_, h));
  control_subs_.push_back(bus_.subscribe(kAssignTopic, id_, h));
  control_subs_.push_back(bus_.subscribe(kHeartbeatTopic, id_, h));
  lifecycle_ = Lifecycle::Active;
  heartbeat_tick();
  schedule_in(config_.monitor_period_us, [this] { monitor_tick(); });
}

void Worker::crash() {
  if (!alive_) return;
  alive_ = false;
  for (auto s : control_subs_) bus_.unsubscribe(s);
  control_subs_.clear();
  for (auto& [_, tr] : types_)
    for (auto& [__, s] : tr.subscriptions) bus_.unsubscribe(s);
  if (out_)
    for (auto& [_, s] : out_->sessions)
      if (s.observer) bus_.unsubscribe(*s.observer);
}

std::vector<std::string> Worker::types() const {
  std::vector<std::string> out;
  for (const auto& [n, tr] : types_)
    if (!tr.provisional) out.push_back(n);
  return out;
}

std::vector<std::string> Worker::detecting() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : types_) out.push_back(n);
  return out;
}

std::set<std::string> Worker::input_event_types() const {
  std::set<std::string> out;
  for (const auto& [_, tr] : types_)
    if (!tr.provisional)
      for (const auto& in : tr.evaluator->definition().inputs) out.insert(in);
  return out;
}

double Worker::flow() const {
  double f = 0;
  for (const auto& topic : input_event_types()) {
    auto it = topic_flow_.find(topic);
    if (it != topic_flow_.end()) f += it->second;
  }
  return f;
}

double Worker::type_flow(const std::string& type) const {
  auto t = types_.find(type);
  if (t == types_.end()) return 0;
  double f = 0;
  for (const auto& in : t->second.evaluator->definition().inputs) {
    auto it = topic_flow_.find(in);
    if (it != topic_flow_.end()) f += it->second;
  }
  return f;
}

double Worker::consumption(const std::string& type) {
  if (!types_.count(type)) return 0;
  auto e = store_.get(ctx_key(type));
  if (!e) return 0;
  try {
    return static_cast<double>(peek_buffered_count(e->value)) + 1.0;
  } catch (const DecodeError&) {
    return 0;
  }
}

double Worker::instance_consumption() {
  double ic = 0;
  for (const auto& t : types()) ic += consumption(t);
  return ic;
}

LoadSnapshot Worker::snapshot(const std::string& request_id) {
  LoadSnapshot s;
  s.request_id = request_id;
  s.worker_id = id_;
  s.F = flow();
  s.IC = instance_consumption();
  s.n_types = types().size();
  s.lifecycle = lifecycle_;
  s.timestamp = runtime_.now();
  s.busy = busy();
  return s;
}

bool Worker::peer_alive(const std::string& id) const {
  auto it = peers_.find(id);
  if (it == peers_.end()) return false;
  if (it->second.second == Lifecycle::Terminated) return false;
  return runtime_.now() - it->second.first <= config_.heartbeat_us * config_.missed_heartbeats;
}

std::size_t Worker::alive_workers() const {
  std::size_t n = 1;
  for (const auto& [id, _] : peers_)
    if (peer_alive(id)) ++n;
  return n;
}

// ---------------------------------------------------------------- messages

void Worker::on_control(const Delivery& d) {
  if (!alive_) return;
  Envelope env;
  try {
    env = decode(d.message->payload);
  } catch (const DecodeError&) {
    return;
  }
  const auto& topic = d.message->topic;
  const auto& kind = env.kind;
  if (kind == Heartbeat::kKind) {
    auto hb = env.as<Heartbeat>();
    if (hb.worker_id == id_) return;
    if (hb.lifecycle == Lifecycle::Terminated)
      peers_.erase(hb.worker_id);
    else
      peers_[hb.worker_id] = {runtime_.now(), hb.lifecycle};
  } else if (kind == SnapshotRequest::kKind) {
    auto r = env.as<SnapshotRequest>();
    if (r.from != id_ && lifecycle_ == Lifecycle::Active) send(worker_topic(r.from), snapshot(r.request_id));
  } else if (kind == LoadSnapshot::kKind) {
    auto s = env.as<LoadSnapshot>();
    if (topic == kAssignTopic) {
      on_assignment_snapshot(s);
    } else if (out_ && out_->stage == Outgoing::Stage::Collecting && s.request_id == out_->session_id) {
      out_->snapshots.push_back(s);
    }
  } else if (kind == AssignmentRequest::kKind) {
    on_assignment_request(env.as<AssignmentRequest>());
  } else if (kind == AssignmentUpdate::kKind) {
    on_assignment_update(env.as<AssignmentUpdate>());
  } else if (kind == RelocationProposal::kKind) {
    auto p = env.as<RelocationProposal>();
    if (p.target == id_) on_proposal(p);
  } else if (kind == ProposalResponse::kKind) {
    auto r = env.as<ProposalResponse>();
    if (r.to == id_) on_proposal_response(r);
  } else if (kind == HandoverPhase::kKind) {
    auto p = env.as<HandoverPhase>();
    if (p.to != id_) return;
    if (out_ && out_->session_id == p.session_id && p.from == out_->target)
      on_target_phase(p);
    else if (in_ && in_->session_id == p.session_id && p.from == in_->source)
      on_source_phase(p);
  } else if (kind == DefinitionUpdate::kKind) {
    auto u = env.as<DefinitionUpdate>();
    auto it = types_.find(u.event_type);
    if (it == types_.end()) return;
    try {
      auto def = definition_from_json(u.definition);
      auto& tr = it->second;
      const auto& old = tr.evaluator->definition();
      auto ctx = [](const EventTypeDefinition& d) { return d.context ? to_json(*d.context) : nlohmann::json(); };
      bool same_shape = def.op == old.op && def.inputs == old.inputs && ctx(def) == ctx(old);
      tr.evaluator = std::make_unique<Evaluator>(def);
      tr.notify = u.notify;
      if (!same_shape) tr.state = tr.evaluator->initial_state();
    } catch (const DefinitionError&) {
    }
  } else if (kind == TypeDeleted::kKind) {
    auto t = env.as<TypeDeleted>();
    if (!types_.count(t.event_type)) return;
    drop_type(t.event_type);
    store_.remove(ctx_key(t.event_type));
  }
}

// ---------------------------------------------------------------- detection

void Worker::count_topic(const std::string& topic, std::uint64_t offset) {
  auto& next = topic_seen_offset_[topic];
  if (offset < next) return;
  next = offset + 1;
  ++topic_count_[topic];
}

void Worker::on_input(const std::string& type, const Delivery& d) {
  if (!alive_) return;
  auto it = types_.find(type);
  if (it == types_.end()) return;
  auto& tr = it->second;
  const auto& m = *d.message;
  auto& next = tr.next_offsets[m.topic];
  if (m.offset < next) {
    ++stats_.duplicates_skipped;
    return;
  }
  next = m.offset + 1;
  count_topic(m.topic, m.offset);
  if (parsed_msg_ != d.message) {
    try {
      parsed_event_ = parse_wire(m.payload);
    } catch (const DecodeError&) {
      parsed_msg_.reset();
      ++stats_.evaluation_errors;
      return;
    }
    parsed_msg_ = d.message;
  }
  const Event& e = parsed_event_;
  if (!tr.recent.insert(e.event_id)) {
    ++stats_.duplicates_skipped;
    return;
  }
  ++stats_.processed;
  std::vector<Event> outs;
  try {
    outs = tr.evaluator->evaluate(e, tr.state);
  } catch (const EvaluationError&) {
    ++stats_.evaluation_errors;
  }
  busy_until_ = std::max(runtime_.now(), busy_until_) + config_.eval_cost_us;
  for (auto& o : outs) {
    o.source_id = id_;
    runtime_.schedule(busy_until_, id_, [this, type, o = std::move(o)]() mutable { publish_output(type, std::move(o)); });
  }
  bool in_handover = out_ && out_->sessions.count(type);
  if (!tr.provisional && !in_handover && ++tr.since_checkpoint >= config_.checkpoint_interval) checkpoint(type);
}

void Worker::publish_output(const std::string& type, Event out) {
  bus_.publish(type, to_wire(out), id_);
  ++stats_.published;
  runtime_.on_detection(id_, out, runtime_.now());
  auto t = types_.find(type);
  if (t != types_.end() && t->second.notify) send(kCatalogTopic, Detection{type, to_json(out)});
  if (out_ && out_->stage == Outgoing::Stage::Handover) {
    auto s = out_->sessions.find(type);
    if (s != out_->sessions.end() &&
        (s->second.phase == Phase::StateTransferred || s->second.phase == Phase::DualDetection) &&
        s->second.source_outputs.size() < config_.comparison_window) {
      s->second.source_outputs.push_back(out.event_id);
      check_match(type);
    }
  }
}

void Worker::checkpoint(const std::string& type, std::function<void(std::uint64_t)> then) {
  auto& tr = types_.at(type);
  TypeCheckpoint cp{tr.state, tr.next_offsets, tr.recent.items(), tr.epoch};
  auto bytes = std::make_shared<Bytes>(encode_checkpoint(cp));
  tr.since_checkpoint = 0;
  // written once every output of the captured state has gone out
  TimeUs at = std::max(runtime_.now(), busy_until_);
  runtime_.schedule(at, id_, [this, type, bytes, then = std::move(then)] {
    auto t = types_.find(type);
    if (!then && (t == types_.end() || t->second.provisional)) return;
    auto v = store_.put(ctx_key(type), std::move(*bytes));
    ++stats_.checkpoints;
    if (then) then(v);
  });
}

void Worker::install_type(const std::string& name, const EventTypeDefinition& def,
                          std::optional<TypeCheckpoint> cp, const std::map<std::string, std::uint64_t>& start_offsets,
                          std::uint64_t epoch, bool notify, bool provisional) {
  TypeRuntime tr;
  tr.evaluator = std::make_unique<Evaluator>(def);
  tr.state = cp && cp->state.owner_type == def.name ? cp->state : tr.evaluator->initial_state();
  tr.recent = RecentIds(config_.recent_ids);
  if (cp) tr.recent.assign(cp->recent_ids);
  tr.epoch = epoch;
  tr.notify = notify;
  tr.provisional = provisional;
  for (const auto& in : def.inputs) {
    std::uint64_t from = bus_.end_offset(in);
    if (cp && cp->next_offsets.count(in))
      from = cp->next_offsets.at(in);
    else if (start_offsets.count(in))
      from = start_offsets.at(in);
    tr.next_offsets[in] = from;
  }
  auto& slot = types_[name] = std::move(tr);
  for (const auto& [topic, from] : slot.next_offsets) {
    if (!topic_seen_offset_.count(topic)) topic_seen_offset_[topic] = bus_.end_offset(topic);
    slot.subscriptions[topic] = bus_.subscribe_from(topic, id_ + "/" + name, from,
                                                    [this, name](const Delivery& d) { on_input(name, d); });
  }
}

void Worker::drop_type(const std::string& name) {
  auto it = types_.find(name);
  if (it == types_.end()) return;
  for (auto& [_, s] : it->second.subscriptions) bus_.unsubscribe(s);
  types_.erase(it);
}

// ---------------------------------------------------------------- periodic work

void Worker::heartbeat_tick() {
  if (!alive_ || lifecycle_ == Lifecycle::Terminated) return;
  send(kHeartbeatTopic, Heartbeat{id_, runtime_.now(), lifecycle_, types().size()});
  schedule_in(config_.heartbeat_us, [this] { heartbeat_tick(); });
}

void Worker::sample_flows() {
  double period_s = static_cast<double>(config_.monitor_period_us) / 1e6;
  double alpha = std::min(1.0, static_cast<double>(config_.monitor_period_us) /
                                   static_cast<double>(config_.flow_window_us));
  std::set<std::string> tracked;
  for (const auto& [_, tr] : types_)
    for (const auto& in : tr.evaluator->definition().inputs) tracked.insert(in);
  if (in_)
    for (const auto& [_, t] : in_->types)
      for (const auto& [topic, __] : t.topic_flows) tracked.insert(topic);
  for (const auto& topic : tracked) {
    double rate = static_cast<double>(topic_count_[topic]) / period_s;
    auto& f = topic_flow_[topic];
    f = alpha * rate + (1 - alpha) * f;
  }
  topic_count_.clear();
  for (auto it = topic_flow_.begin(); it != topic_flow_.end();)
    it = tracked.count(it->first) ? std::next(it) : topic_flow_.erase(it);
}

void Worker::check_peers() {
  if (out_ && out_->stage != Outgoing::Stage::Collecting && !peer_alive(out_->target)) {
    if (out_->stage == Outgoing::Stage::Proposed) {
      cancel_outgoing("target lost");
    } else {
      for (auto& [type, s] : out_->sessions) {
        if (s.phase == Phase::Acknowledged)
          s.phase = Phase::Completed;
        else if (s.phase != Phase::Completed && s.phase != Phase::Aborted)
          abort_type(type, "target lost", false);
      }
      maybe_finish_outgoing();
    }
  }
  if (in_ && !peer_alive(in_->source)) {
    for (auto& [type, phase] : in_->phases)
      if (phase != Phase::Completed && phase != Phase::Aborted) discard_incoming(type, "source lost", false, false);
    maybe_finish_incoming();
  }
}

MonitorAction Worker::monitor_decision(std::vector<std::string>* relocate) {
  if (lifecycle_ != Lifecycle::Active || busy() || cooldown_ > 0) return MonitorAction::None;
  auto owned = types();
  if (owned.empty())
    return idle_periods_ >= config_.idle_periods_before_exit && alive_workers() >= 2 ? MonitorAction::Exit
                                                                                     : MonitorAction::None;
  double F = flow();
  std::vector<std::string> list;
  if (config_.strategy == Strategy::InputSimilarity) {
    if (F > config_.max_flow && owned.size() >= 2) {
      std::vector<TypeFlow> tf;
      for (const auto& t : owned) tf.push_back({t, types_.at(t).evaluator->definition().inputs, type_flow(t)});
      list = search_types_by_input_similarity(tf, F, config_.max_flow, rng_).types;
    }
  } else {
    double IC = instance_consumption();
    if (IC > config_.max_resource && owned.size() >= 2) {
      std::vector<std::pair<std::string, double>> ecs;
      for (const auto& t : owned) ecs.emplace_back(t, consumption(t));
      list = search_types_by_resource_usage(ecs, IC, config_.max_resource).types;
    }
  }
  // moving every type would only shift the overload elsewhere
  if (list.size() >= owned.size()) list.resize(owned.size() - 1);
  if (!list.empty()) {
    if (relocate) *relocate = list;
    return MonitorAction::Relocate;
  }
  if (F < config_.min_flow && alive_workers() >= 2) return MonitorAction::ScaleIn;
  return MonitorAction::None;
}

void Worker::monitor_tick() {
  if (!alive_ || lifecycle_ == Lifecycle::Terminated) return;
  schedule_in(config_.monitor_period_us, [this] { monitor_tick(); });
  sample_flows();
  check_peers();
  idle_periods_ = types_.empty() && !busy() ? idle_periods_ + 1 : 0;
  if (config_.autonomous) {
    std::vector<std::string> list;
    switch (monitor_decision(&list)) {
      case MonitorAction::Relocate:
        start_relocation(list, false);
        break;
      case MonitorAction::ScaleIn:
        start_relocation(types(), true);
        break;
      case MonitorAction::Exit:
        terminate();
        return;
      case MonitorAction::None:
        break;
    }
  }
  if (cooldown_ > 0 && !busy()) --cooldown_;
}

// ---------------------------------------------------------------- assignment

void Worker::on_assignment_request(const AssignmentRequest& req) {
  if (lifecycle_ != Lifecycle::Active) return;
  if (!seen_requests_.insert(req.request_id).second) return;
  assignments_[req.request_id] = {req, {}};
  send(kAssignTopic, snapshot(req.request_id));
  auto rid = req.request_id;
  schedule_in(config_.assign_wait_us, [this, rid] { decide_assignment(rid); });
}

void Worker::on_assignment_snapshot(const LoadSnapshot& s) {
  auto it = assignments_.find(s.request_id);
  if (it != assignments_.end()) it->second.snapshots.push_back(s);
}

void Worker::decide_assignment(const std::string& request_id) {
  auto it = assignments_.find(request_id);
  if (it == assignments_.end()) return;
  auto pending = std::move(it->second);
  assignments_.erase(it);
  const LoadSnapshot* winner = nullptr;
  for (const auto& s : pending.snapshots) {
    if (s.lifecycle != Lifecycle::Active) continue;
    if (!winner || s.IC < winner->IC || (s.IC == winner->IC && s.worker_id < winner->worker_id)) winner = &s;
  }
  if (!winner || winner->worker_id != id_ || lifecycle_ != Lifecycle::Active) return;
  const auto& req = pending.request;
  if (types_.count(req.event_type)) return;
  std::optional<TypeCheckpoint> cp;
  if (auto e = store_.get(ctx_key(req.event_type))) {
    try {
      cp = decode_checkpoint(e->value);
    } catch (const DecodeError&) {
    }
  }
  try {
    install_type(req.event_type, definition_from_json(req.definition), cp, req.start_offsets, req.epoch, req.notify,
                 false);
  } catch (const std::exception&) {
    drop_type(req.event_type);
    return;
  }
  ++stats_.claims;
  checkpoint(req.event_type);
  send(kAssignTopic, AssignmentUpdate{req.event_type, id_, req.failed_worker, req.epoch, req.reason});
}

void Worker::on_assignment_update(const AssignmentUpdate& u) {
  if (u.worker_id == id_) return;
  auto it = types_.find(u.event_type);
  if (it == types_.end() || it->second.provisional || u.epoch <= it->second.epoch) return;
  if (out_ && out_->sessions.count(u.event_type)) return;
  // someone holds a newer claim on this type
  drop_type(u.event_type);
}

// ---------------------------------------------------------------- relocation, source side

bool Worker::force_relocation(const std::vector<std::string>& types) {
  if (!alive_ || lifecycle_ != Lifecycle::Active || busy() || types.empty()) return false;
  for (const auto& t : types) {
    auto it = types_.find(t);
    if (it == types_.end() || it->second.provisional) return false;
  }
  start_relocation(types, false);
  return true;
}

void Worker::start_relocation(std::vector<std::string> types, bool scale_in) {
  out_ = Outgoing{};
  out_->session_id = id_ + "#" + std::to_string(++session_counter_);
  out_->types = std::move(types);
  out_->scale_in = scale_in;
  if (config_.strategy == Strategy::InputSimilarity) {
    if (scale_in) {
      out_->need = flow();
    } else {
      for (const auto& t : out_->types) out_->need += type_flow(t);
    }
  } else {
    for (const auto& t : out_->types) out_->need += consumption(t);
  }
  ++stats_.sessions_started;
  send(kLoadsTopic, SnapshotRequest{out_->session_id, id_});
  auto sid = out_->session_id;
  schedule_in(config_.monitor_period_us, [this, sid] {
    if (out_ && out_->session_id == sid && out_->stage == Outgoing::Stage::Collecting) choose_and_propose();
  });
}

void Worker::choose_and_propose() {
  auto& o = *out_;
  TargetQuery q;
  q.requester = id_;
  q.need = o.need;
  q.strategy = config_.strategy;
  q.threshold = config_.strategy == Strategy::InputSimilarity ? config_.max_flow : config_.max_resource;
  if (o.scale_in) q.threshold *= config_.scale_in_headroom;
  q.min_timestamp = runtime_.now() - 2 * config_.monitor_period_us;
  q.exclude = o.refused;
  if (auto target = choose_target_worker(o.snapshots, q)) return propose(*target, false);
  if (o.scale_in) return cancel_outgoing("no capacity for scale-in");
  auto fresh = runtime_.spawn_worker();
  if (!fresh) {
    ++stats_.deferrals;
    runtime_.on_deferral(id_);
    return cancel_outgoing("instance ceiling reached");
  }
  propose(*fresh, true);
}

void Worker::propose(const std::string& target, bool spawned) {
  auto& o = *out_;
  o.stage = Outgoing::Stage::Proposed;
  o.target = target;
  o.spawned = spawned;
  if (!peers_.count(target)) peers_[target] = {runtime_.now(), Lifecycle::Active};
  RelocationProposal p;
  p.session_id = o.session_id;
  p.source = id_;
  p.target = target;
  p.need = o.need;
  p.scale_in = o.scale_in;
  p.spawned = spawned;
  for (const auto& t : o.types) {
    const auto& tr = types_.at(t);
    TypeTransfer x;
    x.definition = to_json(tr.evaluator->definition());
    x.flow = type_flow(t);
    x.consumption = consumption(t);
    x.epoch = tr.epoch;
    x.notify = tr.notify;
    for (const auto& in : tr.evaluator->definition().inputs) {
      auto f = topic_flow_.find(in);
      x.topic_flows[in] = f == topic_flow_.end() ? 0.0 : f->second;
    }
    p.types.push_back(std::move(x));
  }
  send(worker_topic(target), p);
  auto sid = o.session_id;
  schedule_in(config_.proposal_timeout_us, [this, sid, target] {
    if (out_ && out_->session_id == sid && out_->stage == Outgoing::Stage::Proposed && out_->target == target)
      on_proposal_response({sid, target, id_, false, "timeout"});
  });
}

void Worker::on_proposal_response(const ProposalResponse& r) {
  if (!out_ || out_->session_id != r.session_id || out_->stage != Outgoing::Stage::Proposed ||
      out_->target != r.from) {
    // an acceptance for an attempt already given up
    if (r.accepted) send(worker_topic(r.from), HandoverPhase{r.session_id, "*", id_, r.from, Phase::Aborted, 0, 0,
                                                             "proposal withdrawn"});
    return;
  }
  if (r.accepted) {
    if (out_->scale_in) lifecycle_ = Lifecycle::Draining;
    return begin_handover();
  }
  auto& o = *out_;
  o.refused.push_back(r.from);
  if (o.spawned) return cancel_outgoing("spawned target refused");
  if (o.refused.size() == 1) return choose_and_propose();
  if (o.scale_in) return cancel_outgoing("no capacity for scale-in");
  auto fresh = runtime_.spawn_worker();
  if (!fresh) {
    ++stats_.deferrals;
    runtime_.on_deferral(id_);
    return cancel_outgoing("instance ceiling reached");
  }
  propose(*fresh, true);
}

void Worker::begin_handover() {
  auto& o = *out_;
  o.stage = Outgoing::Stage::Handover;
  auto sid = o.session_id;
  for (const auto& type : o.types) {
    auto& s = o.sessions[type];
    s.observer = bus_.subscribe(type, id_ + "/observe/" + type,
                                [this, type](const Delivery& d) { on_observed_output(type, d); });
    std::uint64_t buffered = types_.at(type).state.buffered_count();
    checkpoint(type, [this, sid, type, buffered](std::uint64_t version) {
      if (!out_ || out_->session_id != sid) return;
      auto& s = out_->sessions.at(type);
      if (s.phase != Phase::Proposed) return;
      s.phase = Phase::StateTransferred;
      s.buffered_at_checkpoint = buffered;
      send(worker_topic(out_->target),
           HandoverPhase{sid, type, id_, out_->target, Phase::StateTransferred, version, buffered, ""});
    });
  }
  schedule_in(config_.handover_timeout_us, [this, sid] {
    if (!out_ || out_->session_id != sid) return;
    for (auto& [type, s] : out_->sessions) {
      if (s.phase == Phase::Acknowledged)
        s.phase = Phase::Completed;
      else if (s.phase != Phase::Completed && s.phase != Phase::Aborted)
        abort_type(type, "handover timeout", false);
    }
    maybe_finish_outgoing();
  });
}

void Worker::on_observed_output(const std::string& type, const Delivery& d) {
  if (!alive_ || !out_ || d.message->publisher != out_->target) return;
  auto s = out_->sessions.find(type);
  if (s == out_->sessions.end()) return;
  try {
    auto e = parse_wire(d.message->payload);
    s->second.target_outputs.insert(e.event_id);
    ++s->second.target_count;
  } catch (const DecodeError&) {
    return;
  }
  check_match(type);
}

void Worker::on_target_phase(const HandoverPhase& p) {
  auto& o = *out_;
  if (p.event_type == "*" && p.phase == Phase::Aborted) {
    for (auto& [type, s] : o.sessions)
      if (s.phase != Phase::Acknowledged && s.phase != Phase::Completed && s.phase != Phase::Aborted)
        abort_type(type, p.reason, false);
    return maybe_finish_outgoing();
  }
  auto it = o.sessions.find(p.event_type);
  if (it == o.sessions.end()) return;
  auto& s = it->second;
  switch (p.phase) {
    case Phase::DualDetection:
      if (s.phase != Phase::StateTransferred) return;
      if (p.buffered_count != s.buffered_at_checkpoint) return abort_type(p.event_type, "buffered count mismatch");
      s.phase = Phase::DualDetection;
      schedule_in(config_.comparison_timeout_us, [this, sid = o.session_id, type = p.event_type] {
        if (!out_ || out_->session_id != sid) return;
        auto& cur = out_->sessions.at(type);
        if (cur.phase != Phase::DualDetection) return;
        // fewer than K outputs so far: judge on what both sides produced
        bool all = std::all_of(cur.source_outputs.begin(), cur.source_outputs.end(),
                               [&](const std::string& id) { return cur.target_outputs.count(id) != 0; });
        if (all)
          acknowledge(type);
        else
          abort_type(type, "outputs differ");
      });
      return check_match(p.event_type);
    case Phase::Completed:
      if (s.phase != Phase::Acknowledged) return;
      s.phase = Phase::Completed;
      ++stats_.handovers_completed;
      runtime_.on_relocation_completed(p.event_type, id_, o.target);
      return maybe_finish_outgoing();
    case Phase::Aborted:
      if (s.phase == Phase::Acknowledged || s.phase == Phase::Completed || s.phase == Phase::Aborted) return;
      if (s.observer) bus_.unsubscribe(*s.observer);
      s.observer.reset();
      s.phase = Phase::Aborted;
      ++stats_.handovers_aborted;
      return maybe_finish_outgoing();
    default:
      return;
  }
}

void Worker::check_match(const std::string& type) {
  auto& s = out_->sessions.at(type);
  if (s.phase != Phase::DualDetection) return;
  auto k = config_.comparison_window;
  if (s.source_outputs.size() < k) return;
  bool all = std::all_of(s.source_outputs.begin(), s.source_outputs.end(),
                         [&](const std::string& id) { return s.target_outputs.count(id) != 0; });
  if (all) return acknowledge(type);
  if (s.target_count >= 2 * k) abort_type(type, "outputs differ");
}

void Worker::acknowledge(const std::string& type) {
  auto& o = *out_;
  auto& s = o.sessions.at(type);
  s.phase = Phase::Acknowledged;
  if (s.observer) bus_.unsubscribe(*s.observer);
  s.observer.reset();
  auto epoch = types_.at(type).epoch;
  send(kAssignTopic, AssignmentUpdate{type, o.target, id_, epoch + 1, "relocation"});
  send(worker_topic(o.target), HandoverPhase{o.session_id, type, id_, o.target, Phase::Acknowledged, 0, 0, ""});
  drop_type(type);
}

void Worker::abort_type(const std::string& type, const std::string& reason, bool finish) {
  auto& o = *out_;
  auto& s = o.sessions.at(type);
  if (s.observer) bus_.unsubscribe(*s.observer);
  s.observer.reset();
  s.phase = Phase::Aborted;
  ++stats_.handovers_aborted;
  send(worker_topic(o.target), HandoverPhase{o.session_id, type, id_, o.target, Phase::Aborted, 0, 0, reason});
  if (finish) maybe_finish_outgoing();
}

void Worker::maybe_finish_outgoing() {
  if (!out_ || out_->stage != Outgoing::Stage::Handover) return;
  bool all_completed = true;
  for (const auto& [_, s] : out_->sessions) {
    if (s.phase != Phase::Completed && s.phase != Phase::Aborted) return;
    all_completed = all_completed && s.phase == Phase::Completed;
  }
  bool scale_in = out_->scale_in;
  out_.reset();
  cooldown_ = config_.cooldown_periods;
  if (scale_in) {
    if (all_completed && types_.empty())
      terminate();
    else
      lifecycle_ = Lifecycle::Active;
  }
}

void Worker::cancel_outgoing(const std::string& reason) {
  if (!out_) return;
  if (out_->stage == Outgoing::Stage::Proposed)
    send(worker_topic(out_->target),
         HandoverPhase{out_->session_id, "*", id_, out_->target, Phase::Aborted, 0, 0, reason});
  out_.reset();
  lifecycle_ = lifecycle_ == Lifecycle::Draining ? Lifecycle::Active : lifecycle_;
  cooldown_ = config_.cooldown_periods;
}

// ---------------------------------------------------------------- relocation, target side

void Worker::on_proposal(const RelocationProposal& p) {
  auto refuse = [&](const std::string& reason) {
    send(worker_topic(p.source), ProposalResponse{p.session_id, id_, p.source, false, reason});
  };
  if (lifecycle_ != Lifecycle::Active) return refuse("not active");
  if (in_) return refuse("busy");
  if (out_) {
    // mutual proposals: the smaller id keeps its attempt
    if (out_->stage != Outgoing::Stage::Handover && p.source < id_)
      cancel_outgoing("yielding to " + p.source);
    else
      return refuse("busy");
  }
  if (!p.spawned) {
    bool by_flow = config_.strategy == Strategy::InputSimilarity;
    double load = by_flow ? flow() : instance_consumption();
    double threshold = by_flow ? config_.max_flow : config_.max_resource;
    if (!(load + p.need < threshold)) return refuse("capacity");
  }
  in_ = Incoming{};
  in_->session_id = p.session_id;
  in_->source = p.source;
  for (const auto& t : p.types) {
    auto name = t.definition.value("name", "");
    in_->types[name] = t;
    in_->phases[name] = Phase::Proposed;
    for (const auto& [topic, f] : t.topic_flows)
      if (!topic_flow_.count(topic)) topic_flow_[topic] = f;
  }
  if (!peers_.count(p.source)) peers_[p.source] = {runtime_.now(), Lifecycle::Active};
  send(worker_topic(p.source), ProposalResponse{p.session_id, id_, p.source, true, ""});
  auto sid = p.session_id;
  schedule_in(config_.handover_timeout_us + config_.proposal_timeout_us, [this, sid] {
    if (!in_ || in_->session_id != sid) return;
    for (auto& [type, phase] : in_->phases)
      if (phase != Phase::Completed && phase != Phase::Aborted) discard_incoming(type, "handover timeout", true, false);
    maybe_finish_incoming();
  });
}

void Worker::on_source_phase(const HandoverPhase& p) {
  auto& in = *in_;
  if (p.event_type == "*") {
    if (p.phase != Phase::Aborted) return;
    for (auto& [type, phase] : in.phases)
      if (phase != Phase::Completed && phase != Phase::Aborted) discard_incoming(type, p.reason, false, false);
    return maybe_finish_incoming();
  }
  auto ph = in.phases.find(p.event_type);
  if (ph == in.phases.end()) return;
  switch (p.phase) {
    case Phase::StateTransferred:
      if (ph->second != Phase::Proposed) return;
      ph->second = Phase::StateTransferred;
      return load_transferred(in.session_id, p.event_type, p.checkpoint_version,
                              runtime_.now() + config_.handover_timeout_us);
    case Phase::Acknowledged: {
      auto t = types_.find(p.event_type);
      if (ph->second != Phase::DualDetection || t == types_.end()) return;
      t->second.provisional = false;
      t->second.epoch = in.types.at(p.event_type).epoch + 1;
      checkpoint(p.event_type);
      ph->second = Phase::Completed;
      send(worker_topic(in.source), HandoverPhase{in.session_id, p.event_type, id_, in.source, Phase::Completed, 0, 0, ""});
      return maybe_finish_incoming();
    }
    case Phase::Aborted:
      if (ph->second == Phase::Completed || ph->second == Phase::Aborted) return;
      return discard_incoming(p.event_type, p.reason, false);
    default:
      return;
  }
}

void Worker::load_transferred(const std::string& session_id, const std::string& type, std::uint64_t version,
                              TimeUs deadline) {
  if (!alive_ || !in_ || in_->session_id != session_id) return;
  if (in_->phases.at(type) != Phase::StateTransferred) return;
  auto e = store_.get(ctx_key(type));
  if (!e || e->version < version) {
    if (runtime_.now() >= deadline) return discard_incoming(type, "checkpoint not visible", true);
    schedule_in(config_.store_retry_us,
                [this, session_id, type, version, deadline] { load_transferred(session_id, type, version, deadline); });
    return;
  }
  std::uint64_t buffered = 0;
  try {
    auto cp = decode_checkpoint(e->value);
    buffered = cp.state.buffered_count();
    const auto& t = in_->types.at(type);
    install_type(type, definition_from_json(t.definition), cp, {}, t.epoch, t.notify, true);
  } catch (const std::exception& ex) {
    drop_type(type);
    return discard_incoming(type, ex.what(), true);
  }
  in_->phases[type] = Phase::DualDetection;
  send(worker_topic(in_->source),
       HandoverPhase{session_id, type, id_, in_->source, Phase::DualDetection, e->version, buffered, ""});
}

void Worker::discard_incoming(const std::string& type, const std::string& reason, bool tell_source, bool finish) {
  if (!in_) return;
  auto t = types_.find(type);
  if (t != types_.end() && t->second.provisional) drop_type(type);
  in_->phases[type] = Phase::Aborted;
  if (tell_source)
    send(worker_topic(in_->source), HandoverPhase{in_->session_id, type, id_, in_->source, Phase::Aborted, 0, 0, reason});
  if (finish) maybe_finish_incoming();
}

void Worker::maybe_finish_incoming() {
  if (!in_) return;
  for (const auto& [_, phase] : in_->phases)
    if (phase != Phase::Completed && phase != Phase::Aborted) return;
  in_.reset();
  cooldown_ = config_.cooldown_periods;
}

void Worker::terminate() {
  if (!alive_) return;
  lifecycle_ = Lifecycle::Terminated;
  send(kHeartbeatTopic, Heartbeat{id_, runtime_.now(), lifecycle_, 0});
  for (auto& [_, tr] : types_)
    for (auto& [__, s] : tr.subscriptions) bus_.unsubscribe(s);
  types_.clear();
  for (auto s : control_subs_) bus_.unsubscribe(s);
  control_subs_.clear();
  alive_ = false;
  runtime_.retire_worker(id_);
}

}  // namespace ccep
