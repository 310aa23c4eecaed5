#include "ccep/bus/bus.hpp"

#include <algorithm>

namespace ccep {

bool is_control_topic(const std::string& topic) { return topic.rfind("ctl.", 0) == 0; }

Bus::Bus(Clock clock, BusConfig config)
    : clock_(std::move(clock)), config_(config), fault_rng_(config.faults.seed) {
  if (!clock_) throw std::invalid_argument("bus needs a clock");
}

std::uint64_t Bus::publish(const std::string& topic, std::string payload, const std::string& publisher) {
  if (topic.empty()) throw BusError("empty topic name");
  std::shared_ptr<const Message> msg;
  std::function<void(const Message&)> tap;
  {
    std::lock_guard lock(mu_);
    if (stopped_) throw BusError("broker stopped");
    auto& log = topics_[topic];
    auto m = std::make_shared<Message>();
    m->topic = topic;
    m->offset = log.next_offset++;
    m->publisher = publisher;
    m->payload = std::move(payload);
    m->published_at = clock_();
    msg = m;
    log.retained.push_back(msg);
    while (log.retained.size() > config_.retention) log.retained.pop_front();
    bool faults = !is_control_topic(topic);
    for (auto id : log.subscribers) enqueue(id, subs_.at(id), msg, faults);
    ++stats_.published;
    tap = tap_;
  }
  if (tap) tap(*msg);
  return msg->offset;
}

void Bus::push(SubscriptionId id, Sub& sub, const std::shared_ptr<const Message>& msg, TimeUs at, bool redelivered) {
  at = std::max(at, sub.last_deliver_at);
  sub.last_deliver_at = at;
  auto seq = next_seq_++;
  sub.queue.emplace_back(seq, Delivery{id, msg, at, redelivered});
  heap_.push({at, seq, id});
}

void Bus::enqueue(SubscriptionId id, Sub& sub, const std::shared_ptr<const Message>& msg, bool faults) {
  TimeUs at = clock_() + config_.latency_us;
  const auto& f = config_.faults;
  if (!faults) {
    push(id, sub, msg, at, false);
    return;
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (f.delay_rate > 0 && u(fault_rng_) < f.delay_rate) {
    std::uniform_int_distribution<TimeUs> extra(0, std::max<TimeUs>(f.max_delay_us, 0));
    at += extra(fault_rng_);
    ++stats_.delayed;
  }
  bool redelivered = false;
  if (f.drop_rate > 0 && u(fault_rng_) < f.drop_rate) {
    // lost on the wire, the broker retries once the ack timeout expires
    at += f.redelivery_timeout_us;
    redelivered = true;
    ++stats_.dropped_then_redelivered;
  }
  push(id, sub, msg, at, redelivered);
  if (f.duplicate_rate > 0 && u(fault_rng_) < f.duplicate_rate) {
    push(id, sub, msg, at, true);
    ++stats_.duplicated;
  }
}

SubscriptionId Bus::add_subscription(const std::string& topic, const std::string& subscriber_id, Handler handler,
                                     std::optional<std::uint64_t> from_offset) {
  if (subscriber_id.empty()) throw BusError("empty subscriber id");
  if (topic.empty()) throw BusError("empty topic name");
  std::lock_guard lock(mu_);
  auto& log = topics_[topic];
  for (auto id : log.subscribers)
    if (subs_.at(id).subscriber_id == subscriber_id)
      throw BusError("duplicate subscription " + subscriber_id + " on " + topic);
  if (from_offset && *from_offset < log.next_offset) {
    std::uint64_t first = log.retained.empty() ? log.next_offset : log.retained.front()->offset;
    if (*from_offset < first)
      throw BusError("offset " + std::to_string(*from_offset) + " on " + topic + " is no longer retained");
  }
  auto id = next_sub_++;
  auto& sub = subs_[id];
  sub.topic = topic;
  sub.subscriber_id = subscriber_id;
  sub.handler = std::move(handler);
  log.subscribers.push_back(id);
  if (from_offset) {
    bool faults = !is_control_topic(topic);
    for (const auto& m : log.retained)
      if (m->offset >= *from_offset) enqueue(id, sub, m, faults);
  }
  return id;
}

SubscriptionId Bus::subscribe(const std::string& topic, const std::string& subscriber_id, Handler handler) {
  return add_subscription(topic, subscriber_id, std::move(handler), std::nullopt);
}

SubscriptionId Bus::subscribe_from(const std::string& topic, const std::string& subscriber_id,
                                   std::uint64_t from_offset, Handler handler) {
  return add_subscription(topic, subscriber_id, std::move(handler), from_offset);
}

void Bus::unsubscribe(SubscriptionId id) {
  std::lock_guard lock(mu_);
  auto it = subs_.find(id);
  if (it == subs_.end()) return;
  auto& subs = topics_[it->second.topic].subscribers;
  subs.erase(std::remove(subs.begin(), subs.end(), id), subs.end());
  subs_.erase(it);
}

bool Bus::subscribed(const std::string& topic, const std::string& subscriber_id) const {
  std::lock_guard lock(mu_);
  auto t = topics_.find(topic);
  if (t == topics_.end()) return false;
  return std::any_of(t->second.subscribers.begin(), t->second.subscribers.end(),
                     [&](SubscriptionId id) { return subs_.at(id).subscriber_id == subscriber_id; });
}

std::optional<Delivery> Bus::take_front(SubscriptionId id, std::optional<TimeUs> limit) {
  auto it = subs_.find(id);
  if (it == subs_.end() || it->second.queue.empty()) return std::nullopt;
  auto& front = it->second.queue.front();
  if (limit && front.second.deliver_at > *limit) return std::nullopt;
  Delivery d = std::move(front.second);
  it->second.queue.pop_front();
  ++stats_.delivered;
  return d;
}

std::optional<Delivery> Bus::poll(SubscriptionId id) {
  std::lock_guard lock(mu_);
  return take_front(id, clock_());
}

std::vector<Delivery> Bus::drain(SubscriptionId id) {
  std::lock_guard lock(mu_);
  std::vector<Delivery> out;
  while (auto d = take_front(id, std::nullopt)) out.push_back(std::move(*d));
  return out;
}

void Bus::discard_stale() const {
  while (!heap_.empty()) {
    const auto& top = heap_.top();
    auto it = subs_.find(top.sub);
    if (it != subs_.end() && !it->second.queue.empty() && it->second.queue.front().first == top.seq) return;
    heap_.pop();
  }
}

std::optional<TimeUs> Bus::next_due() const {
  std::lock_guard lock(mu_);
  discard_stale();
  if (heap_.empty()) return std::nullopt;
  return heap_.top().at;
}

bool Bus::dispatch_next(TimeUs limit) {
  Delivery d;
  Handler handler;
  {
    std::lock_guard lock(mu_);
    discard_stale();
    if (heap_.empty() || heap_.top().at > limit) return false;
    auto top = heap_.top();
    heap_.pop();
    d = *take_front(top.sub, std::nullopt);
    handler = subs_.at(top.sub).handler;
  }
  if (handler) handler(d);
  return true;
}

std::uint64_t Bus::end_offset(const std::string& topic) const {
  std::lock_guard lock(mu_);
  auto t = topics_.find(topic);
  return t == topics_.end() ? 0 : t->second.next_offset;
}

std::size_t Bus::subscriber_count(const std::string& topic) const {
  std::lock_guard lock(mu_);
  auto t = topics_.find(topic);
  return t == topics_.end() ? 0 : t->second.subscribers.size();
}

std::size_t Bus::queued() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [id, s] : subs_) n += s.queue.size();
  return n;
}

void Bus::set_tap(std::function<void(const Message&)> tap) {
  std::lock_guard lock(mu_);
  tap_ = std::move(tap);
}

void Bus::set_faults(const FaultConfig& faults) {
  std::lock_guard lock(mu_);
  config_.faults = faults;
}

void Bus::stop() {
  std::lock_guard lock(mu_);
  stopped_ = true;
}

bool Bus::stopped() const {
  std::lock_guard lock(mu_);
  return stopped_;
}

BusStats Bus::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace ccep
