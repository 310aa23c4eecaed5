#include "ccep/catalog/webhook.hpp"

#include <regex>

#include "httplib.h"

namespace ccep {

PostResult HttpWebhookTransport::post(const std::string& url, const std::string& json_body) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) return {false, 0, "unsupported url " + url};
  httplib::Client cli(m[1].str());
  auto secs = timeout_ms_ / 1000;
  auto usecs = (timeout_ms_ % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
  std::string path = m[2].matched ? m[2].str() : "/";
  auto res = cli.Post(path, json_body, "application/json");
  if (!res) return {false, 0, httplib::to_string(res.error())};
  bool ok = res->status >= 200 && res->status < 300;
  return {ok, res->status, ok ? "" : "HTTP " + std::to_string(res->status)};
}

WebhookDispatcher::WebhookDispatcher(WebhookTransport& transport, Sleeper sleeper, int max_attempts,
                                     TimeUs base_backoff_us)
    : transport_(transport),
      sleeper_(std::move(sleeper)),
      max_attempts_(max_attempts),
      base_backoff_us_(base_backoff_us) {}

std::vector<DeliveryReport> WebhookDispatcher::dispatch(const std::vector<std::string>& urls,
                                                        const Event& detected) {
  std::vector<DeliveryReport> out;
  auto key = detected.event_type + "/" + detected.event_id;
  if (seen_.count(key)) {
    ++stats_.duplicates_skipped;
    return out;
  }
  seen_.insert(key);
  seen_order_.push_back(key);
  if (seen_order_.size() > 65536) {
    seen_.erase(seen_order_.front());
    seen_order_.pop_front();
  }
  auto body = to_wire(detected);
  for (const auto& url : urls) {
    DeliveryReport r;
    r.url = url;
    TimeUs backoff = base_backoff_us_;
    while (r.attempts < max_attempts_) {
      ++r.attempts;
      ++stats_.attempts;
      auto res = transport_.post(url, body);
      if (res.ok) {
        r.delivered = true;
        r.last_error.clear();
        break;
      }
      r.last_error = res.error;
      if (r.attempts < max_attempts_) {
        if (sleeper_) sleeper_(backoff);
        backoff *= 2;
      }
    }
    if (r.delivered)
      ++stats_.delivered;
    else
      ++stats_.dropped;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace ccep
