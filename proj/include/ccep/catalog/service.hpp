#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccep/bus/bus.hpp"
#include "ccep/catalog/catalog.hpp"
#include "ccep/catalog/webhook.hpp"

namespace ccep {

struct CatalogServiceConfig {
  TimeUs heartbeat_us = 500'000;
  int missed_heartbeats = 3;
  /// An unanswered assignment request is re-sent after this long.
  TimeUs request_timeout_us = 1'000'000;
};

struct CatalogServiceStats {
  std::uint64_t requests_published = 0;
  std::uint64_t assignments_recorded = 0;
  std::uint64_t stale_assignments = 0;
  std::uint64_t failures_detected = 0;
};

/// The cataloger node: owns the Catalog, publishes assignment requests one at
/// a time on ctl.assign, learns placements from assignment_update, watches
/// worker heartbeats and dispatches webhooks for detection notices. All entry
/// points are serialized by one mutex.
class CatalogService {
 public:
  static constexpr const char* kId = "catalog";

  CatalogService(Bus& bus, StoreClient store, Clock clock, CatalogServiceConfig config = {},
                 WebhookTransport* transport = nullptr, WebhookDispatcher::Sleeper sleeper = {});

  /// Subscribes to the control topics.
  void start();

  CatalogRecord declare_primitive(const std::string& name);
  CatalogRecord register_event_type(const EventTypeDefinition& def, const std::vector<std::string>& webhooks = {});
  CatalogRecord update_event_type(const std::string& name, const EventTypeDefinition& def);
  void delete_event_type(const std::string& name);
  CatalogRecord add_webhook(const std::string& name, const std::string& url);
  CatalogRecord lookup(const std::string& name) const;
  std::vector<CatalogRecord> list() const;

  /// Failure detection and request pacing; call periodically.
  void tick();

  /// Workers heard from and not declared failed or terminated.
  std::set<std::string> live_workers() const;
  std::set<std::string> failed_workers() const;
  bool idle() const;
  CatalogServiceStats stats() const;
  WebhookStats webhook_stats() const;

 private:
  void on_message(const Delivery& d);
  void enqueue(control::AssignmentRequest req);
  void pump();
  void publish_request(const control::AssignmentRequest& req);

  Bus& bus_;
  Clock clock_;
  CatalogServiceConfig config_;
  mutable std::mutex mu_;
  Catalog catalog_;
  std::unique_ptr<WebhookDispatcher> webhooks_;
  std::deque<control::AssignmentRequest> pending_;
  struct InFlight {
    control::AssignmentRequest request;
    TimeUs sent_at;
    int attempt;
  };
  std::optional<InFlight> in_flight_;
  std::map<std::string, TimeUs> last_heartbeat_;
  std::set<std::string> failed_;
  std::set<std::string> terminated_;
  CatalogServiceStats stats_;
};

}  // namespace ccep
