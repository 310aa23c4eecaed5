#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccep/core/clock.hpp"

namespace ccep {

class BusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Control topics carry choreography messages; everything else is an event topic.
bool is_control_topic(const std::string& topic);

struct Message {
  std::string topic;
  /// Position within the topic, assigned at publish time.
  std::uint64_t offset = 0;
  std::string publisher;
  std::string payload;
  TimeUs published_at = 0;
};

using SubscriptionId = std::uint64_t;

struct Delivery {
  SubscriptionId subscription = 0;
  std::shared_ptr<const Message> message;
  TimeUs deliver_at = 0;
  /// Second or later delivery of the same message to this subscriber.
  bool redelivered = false;
};

using Handler = std::function<void(const Delivery&)>;

/// Fault injection on event topics. Control topics are never faulted.
struct FaultConfig {
  /// A dropped delivery is redelivered after redelivery_timeout_us.
  double drop_rate = 0;
  double duplicate_rate = 0;
  double delay_rate = 0;
  TimeUs max_delay_us = 0;
  TimeUs redelivery_timeout_us = 200'000;
  std::uint64_t seed = 1;
};

struct BusConfig {
  TimeUs latency_us = 0;
  /// Messages kept per topic for subscribe_from.
  std::size_t retention = 1u << 20;
  FaultConfig faults;
};

struct BusStats {
  std::uint64_t published = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_then_redelivered = 0;
  std::uint64_t duplicated = 0;
  std::uint64_t delayed = 0;
};

/// In-memory broker. Every subscriber gets its own FIFO queue; the delivery
/// time of a queued message never precedes that of an earlier one, so faults
/// and delays keep per-publisher order.
///
/// Consumers either poll their own subscription or let a driver call
/// dispatch_next, which pops the globally earliest due delivery and hands it
/// to the subscription's handler.
class Bus {
 public:
  explicit Bus(Clock clock, BusConfig config = {});

  Bus(const Bus&) = delete;
  Bus& operator=(const Bus&) = delete;

  /// Returns the topic offset of the message.
  std::uint64_t publish(const std::string& topic, std::string payload, const std::string& publisher = "");

  /// Delivers every message published after this call.
  SubscriptionId subscribe(const std::string& topic, const std::string& subscriber_id, Handler handler = {});

  /// Like subscribe, but first replays retained messages with offset >=
  /// from_offset. Throws BusError if part of that range is no longer retained.
  SubscriptionId subscribe_from(const std::string& topic, const std::string& subscriber_id,
                                std::uint64_t from_offset, Handler handler = {});

  /// Pending deliveries are discarded.
  void unsubscribe(SubscriptionId id);
  bool subscribed(const std::string& topic, const std::string& subscriber_id) const;

  /// Next due message for one subscription, if any.
  std::optional<Delivery> poll(SubscriptionId id);
  /// Every message currently queued for the subscription, due or not.
  std::vector<Delivery> drain(SubscriptionId id);

  /// Delivery time of the earliest queued message across subscriptions.
  std::optional<TimeUs> next_due() const;
  /// Pops the earliest delivery due at or before `limit` and calls its
  /// handler outside the lock. Returns false if nothing was due.
  bool dispatch_next(TimeUs limit);

  /// Offset the next publish on `topic` will get.
  std::uint64_t end_offset(const std::string& topic) const;
  std::size_t subscriber_count(const std::string& topic) const;
  std::size_t queued() const;

  /// Observes every publish, called outside the lock.
  void set_tap(std::function<void(const Message&)> tap);

  /// Changes fault rates for later publishes; the fault RNG is not reseeded.
  void set_faults(const FaultConfig& faults);

  void stop();
  bool stopped() const;
  BusStats stats() const;

 private:
  struct Sub {
    std::string topic;
    std::string subscriber_id;
    Handler handler;
    std::deque<std::pair<std::uint64_t, Delivery>> queue;  // (seq, delivery)
    TimeUs last_deliver_at = 0;
  };
  struct TopicLog {
    std::uint64_t next_offset = 0;
    std::deque<std::shared_ptr<const Message>> retained;
    std::vector<SubscriptionId> subscribers;
  };
  struct HeapEntry {
    TimeUs at;
    std::uint64_t seq;
    SubscriptionId sub;
    bool operator>(const HeapEntry& o) const { return at != o.at ? at > o.at : seq > o.seq; }
  };

  SubscriptionId add_subscription(const std::string& topic, const std::string& subscriber_id, Handler handler,
                                  std::optional<std::uint64_t> from_offset);
  void enqueue(SubscriptionId id, Sub& sub, const std::shared_ptr<const Message>& msg, bool faults);
  void push(SubscriptionId id, Sub& sub, const std::shared_ptr<const Message>& msg, TimeUs at, bool redelivered);
  std::optional<Delivery> take_front(SubscriptionId id, std::optional<TimeUs> limit);
  void discard_stale() const;

  Clock clock_;
  BusConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, TopicLog> topics_;
  std::map<SubscriptionId, Sub> subs_;
  mutable std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap_;
  std::function<void(const Message&)> tap_;
  std::mt19937_64 fault_rng_;
  SubscriptionId next_sub_ = 1;
  std::uint64_t next_seq_ = 0;
  bool stopped_ = false;
  BusStats stats_;
};

}  // namespace ccep
