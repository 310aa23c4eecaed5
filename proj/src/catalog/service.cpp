#include "ccep/catalog/service.hpp"

#include <algorithm>

#include "ccep/core/error.hpp"

namespace ccep {

using namespace control;

CatalogService::CatalogService(Bus& bus, StoreClient store, Clock clock, CatalogServiceConfig config,
                               WebhookTransport* transport, WebhookDispatcher::Sleeper sleeper)
    : bus_(bus), clock_(std::move(clock)), config_(config), catalog_(std::move(store)) {
  if (transport) webhooks_ = std::make_unique<WebhookDispatcher>(*transport, std::move(sleeper));
}

void CatalogService::start() {
  auto h = [this](const Delivery& d) { on_message(d); };
  bus_.subscribe(kAssignTopic, kId, h);
  bus_.subscribe(kHeartbeatTopic, kId, h);
  bus_.subscribe(kCatalogTopic, kId, h);
}

CatalogRecord CatalogService::declare_primitive(const std::string& name) {
  std::lock_guard lock(mu_);
  return catalog_.declare_primitive(name);
}

CatalogRecord CatalogService::register_event_type(const EventTypeDefinition& def,
                                                  const std::vector<std::string>& webhooks) {
  std::lock_guard lock(mu_);
  std::map<std::string, std::uint64_t> offsets;
  for (const auto& in : def.inputs) offsets[in] = bus_.end_offset(in);
  auto rec = catalog_.register_event_type(def, webhooks, std::move(offsets));
  enqueue(catalog_.initial_request(def.name));
  return rec;
}

CatalogRecord CatalogService::update_event_type(const std::string& name, const EventTypeDefinition& def) {
  std::lock_guard lock(mu_);
  auto rec = catalog_.update_event_type(name, def);
  for (auto& p : pending_)
    if (p.event_type == name) p.definition = to_json(def);
  if (!rec.assigned_worker.empty()) {
    DefinitionUpdate u{name, to_json(def), rec.version, !rec.webhooks.empty(), rec.assigned_worker};
    bus_.publish(worker_topic(rec.assigned_worker), encode(u), kId);
  }
  return rec;
}

void CatalogService::delete_event_type(const std::string& name) {
  std::lock_guard lock(mu_);
  auto owner = catalog_.lookup_metadata(name).assigned_worker;
  catalog_.delete_event_type(name);
  pending_.erase(std::remove_if(pending_.begin(), pending_.end(),
                                [&](const AssignmentRequest& r) { return r.event_type == name; }),
                 pending_.end());
  if (!owner.empty()) bus_.publish(worker_topic(owner), encode(TypeDeleted{name, owner}), kId);
}

CatalogRecord CatalogService::add_webhook(const std::string& name, const std::string& url) {
  std::lock_guard lock(mu_);
  bool had = !catalog_.lookup_metadata(name).webhooks.empty();
  auto rec = catalog_.add_webhook(name, url);
  if (!had && !rec.primitive() && !rec.assigned_worker.empty()) {
    DefinitionUpdate u{name, to_json(*rec.definition), rec.version, true, rec.assigned_worker};
    bus_.publish(worker_topic(rec.assigned_worker), encode(u), kId);
  }
  return rec;
}

CatalogRecord CatalogService::lookup(const std::string& name) const {
  std::lock_guard lock(mu_);
  return catalog_.lookup_metadata(name);
}

std::vector<CatalogRecord> CatalogService::list() const {
  std::lock_guard lock(mu_);
  std::vector<CatalogRecord> out;
  for (const auto& n : catalog_.names()) out.push_back(catalog_.lookup_metadata(n));
  return out;
}

void CatalogService::enqueue(AssignmentRequest req) {
  for (const auto& p : pending_)
    if (p.event_type == req.event_type) return;
  if (in_flight_ && in_flight_->request.event_type == req.event_type &&
      in_flight_->request.epoch == req.epoch)
    return;
  pending_.push_back(std::move(req));
  pump();
}

void CatalogService::publish_request(const AssignmentRequest& req) {
  bus_.publish(kAssignTopic, encode(req), kId);
  ++stats_.requests_published;
}

void CatalogService::pump() {
  if (in_flight_ || pending_.empty()) return;
  auto req = std::move(pending_.front());
  pending_.pop_front();
  if (!catalog_.contains(req.event_type)) return pump();
  in_flight_ = InFlight{req, clock_(), 0};
  publish_request(req);
}

void CatalogService::tick() {
  std::lock_guard lock(mu_);
  auto now = clock_();
  auto limit = config_.heartbeat_us * config_.missed_heartbeats;
  for (const auto& [w, last] : last_heartbeat_) {
    if (failed_.count(w) || terminated_.count(w) || now - last <= limit) continue;
    failed_.insert(w);
    ++stats_.failures_detected;
    for (auto& req : catalog_.handle_worker_failure(w)) enqueue(std::move(req));
  }
  if (in_flight_ && now - in_flight_->sent_at > config_.request_timeout_us) {
    // nobody claimed it: ask again under a fresh id
    auto& f = *in_flight_;
    ++f.attempt;
    f.sent_at = now;
    auto req = f.request;
    req.request_id += "#" + std::to_string(f.attempt);
    publish_request(req);
  }
  pump();
}

void CatalogService::on_message(const Delivery& d) {
  Envelope env;
  try {
    env = decode(d.message->payload);
  } catch (const DecodeError&) {
    return;
  }
  std::lock_guard lock(mu_);
  if (env.kind == Heartbeat::kKind) {
    auto hb = env.as<Heartbeat>();
    if (failed_.count(hb.worker_id)) return;
    if (hb.lifecycle == Lifecycle::Terminated) {
      terminated_.insert(hb.worker_id);
      last_heartbeat_.erase(hb.worker_id);
      return;
    }
    last_heartbeat_[hb.worker_id] = clock_();
  } else if (env.kind == AssignmentUpdate::kKind) {
    auto u = env.as<AssignmentUpdate>();
    if (!catalog_.contains(u.event_type)) return;
    if (catalog_.record_assignment(u.event_type, u.worker_id, u.epoch))
      ++stats_.assignments_recorded;
    else
      ++stats_.stale_assignments;
    if (in_flight_ && in_flight_->request.event_type == u.event_type && u.epoch >= in_flight_->request.epoch) {
      in_flight_.reset();
      pump();
    }
  } else if (env.kind == Detection::kKind) {
    if (!webhooks_) return;
    auto det = env.as<Detection>();
    if (!catalog_.contains(det.event_type)) return;
    const auto& hooks = catalog_.lookup_metadata(det.event_type).webhooks;
    if (!hooks.empty()) webhooks_->dispatch(hooks, event_from_json(det.event));
  }
}

std::set<std::string> CatalogService::live_workers() const {
  std::lock_guard lock(mu_);
  std::set<std::string> out;
  for (const auto& [w, _] : last_heartbeat_)
    if (!failed_.count(w)) out.insert(w);
  return out;
}

std::set<std::string> CatalogService::failed_workers() const {
  std::lock_guard lock(mu_);
  return failed_;
}

bool CatalogService::idle() const {
  std::lock_guard lock(mu_);
  return !in_flight_ && pending_.empty();
}

CatalogServiceStats CatalogService::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

WebhookStats CatalogService::webhook_stats() const {
  std::lock_guard lock(mu_);
  return webhooks_ ? webhooks_->stats() : WebhookStats{};
}

}  // namespace ccep
