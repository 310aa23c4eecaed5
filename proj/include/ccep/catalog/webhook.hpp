#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <deque>
#include <string>
#include <vector>

#include "ccep/core/clock.hpp"
#include "ccep/core/event.hpp"

namespace ccep {

struct PostResult {
  bool ok = false;
  int status = 0;
  std::string error;
};

class WebhookTransport {
 public:
  virtual ~WebhookTransport() = default;
  virtual PostResult post(const std::string& url, const std::string& json_body) = 0;
};

/// POSTs to http://host[:port]/path with a short timeout.
class HttpWebhookTransport : public WebhookTransport {
 public:
  explicit HttpWebhookTransport(int timeout_ms = 2000) : timeout_ms_(timeout_ms) {}
  PostResult post(const std::string& url, const std::string& json_body) override;

 private:
  int timeout_ms_;
};

struct DeliveryReport {
  std::string url;
  int attempts = 0;
  bool delivered = false;
  std::string last_error;
};

struct WebhookStats {
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t attempts = 0;
  std::uint64_t duplicates_skipped = 0;
};

/// Tries each url up to max_attempts times, sleeping base, 2*base, ... in
/// between, then gives up and counts a drop. Events already dispatched for a
/// type are skipped, which hides dual emission during handover.
class WebhookDispatcher {
 public:
  using Sleeper = std::function<void(TimeUs)>;

  WebhookDispatcher(WebhookTransport& transport, Sleeper sleeper, int max_attempts = 3,
                    TimeUs base_backoff_us = 100'000);

  std::vector<DeliveryReport> dispatch(const std::vector<std::string>& urls, const Event& detected);
  const WebhookStats& stats() const { return stats_; }

 private:
  WebhookTransport& transport_;
  Sleeper sleeper_;
  int max_attempts_;
  TimeUs base_backoff_us_;
  WebhookStats stats_;
  std::set<std::string> seen_;
  std::deque<std::string> seen_order_;
};

}  // namespace ccep
