#include "doctest.h"

#include <atomic>
#include <map>
#include <set>
#include <thread>

#include "ccep/bus/bus.hpp"

using namespace ccep;

namespace {

struct FakeClock {
  TimeUs now = 0;
  Clock clock() {
    return [this] { return now; };
  }
};

std::vector<std::string> payloads(Bus& bus, SubscriptionId s) {
  std::vector<std::string> out;
  for (const auto& d : bus.drain(s)) out.push_back(d.message->payload);
  return out;
}

}  // namespace

TEST_CASE("messages arrive in publish order") {
  FakeClock c;
  Bus bus(c.clock());
  auto s = bus.subscribe("A", "sub");
  for (int i = 0; i < 50; ++i) bus.publish("A", std::to_string(i), "p");
  auto got = payloads(bus, s);
  REQUIRE(got.size() == 50);
  for (int i = 0; i < 50; ++i) CHECK(got[static_cast<std::size_t>(i)] == std::to_string(i));
}

TEST_CASE("two interleaved publishers keep their own sequences") {
  FakeClock c;
  Bus bus(c.clock(), {500, 1u << 20, {}});
  auto s = bus.subscribe("A", "sub");
  for (int i = 0; i < 100; ++i) {
    bus.publish("A", "p1:" + std::to_string(i), "p1");
    c.now += 7;
    bus.publish("A", "p2:" + std::to_string(i), "p2");
    c.now += 3;
  }
  c.now += 1000;
  std::map<std::string, int> next;
  int n = 0;
  while (auto d = bus.poll(s)) {
    ++n;
    auto& m = *d->message;
    CHECK(m.payload == m.publisher + ":" + std::to_string(next[m.publisher]++));
  }
  CHECK(n == 200);
}

TEST_CASE("offsets are per topic and subscriptions only see later messages") {
  FakeClock c;
  Bus bus(c.clock());
  CHECK(bus.publish("A", "early") == 0);
  auto s = bus.subscribe("A", "x");
  CHECK(bus.publish("A", "a1") == 1);
  CHECK(bus.publish("B", "b0") == 0);
  CHECK(payloads(bus, s) == std::vector<std::string>{"a1"});
  CHECK(bus.end_offset("A") == 2);
  CHECK(bus.end_offset("missing") == 0);
}

TEST_CASE("subscribe and unsubscribe adjust counts and drop pending deliveries") {
  FakeClock c;
  Bus bus(c.clock());
  auto a = bus.subscribe("T", "a");
  auto b = bus.subscribe("T", "b");
  CHECK(bus.subscriber_count("T") == 2);
  CHECK(bus.subscribed("T", "a"));
  CHECK_THROWS_AS(bus.subscribe("T", "a"), BusError);
  CHECK_THROWS_AS(bus.subscribe("T", ""), BusError);
  bus.publish("T", "m");
  bus.unsubscribe(a);
  CHECK(bus.subscriber_count("T") == 1);
  CHECK_FALSE(bus.subscribed("T", "a"));
  CHECK(bus.queued() == 1);
  CHECK(payloads(bus, b) == std::vector<std::string>{"m"});
}

TEST_CASE("subscribers are isolated from each other") {
  FakeClock c;
  Bus bus(c.clock());
  auto a = bus.subscribe("T", "a");
  auto b = bus.subscribe("T", "b");
  bus.publish("T", "m1");
  CHECK(payloads(bus, a) == std::vector<std::string>{"m1"});
  bus.publish("T", "m2");
  CHECK(payloads(bus, b) == std::vector<std::string>{"m1", "m2"});
  CHECK(payloads(bus, a) == std::vector<std::string>{"m2"});
}

TEST_CASE("latency delays delivery and dispatch respects the limit") {
  FakeClock c;
  Bus bus(c.clock(), {1000, 1u << 20, {}});
  std::vector<std::string> seen;
  bus.subscribe("T", "h", [&](const Delivery& d) { seen.push_back(d.message->payload); });
  bus.publish("T", "m");
  REQUIRE(bus.next_due().has_value());
  CHECK(*bus.next_due() == 1000);
  CHECK_FALSE(bus.dispatch_next(999));
  CHECK(bus.dispatch_next(1000));
  CHECK(seen == std::vector<std::string>{"m"});
  CHECK_FALSE(bus.next_due().has_value());
}

TEST_CASE("replay from an offset and retention limits") {
  FakeClock c;
  Bus bus(c.clock(), {0, 4, {}});
  for (int i = 0; i < 6; ++i) bus.publish("T", std::to_string(i));
  auto s = bus.subscribe_from("T", "r", 3);
  bus.publish("T", "6");
  CHECK(payloads(bus, s) == std::vector<std::string>{"3", "4", "5", "6"});
  CHECK_THROWS_AS(bus.subscribe_from("T", "old", 1), BusError);
}

TEST_CASE("faults on event topics keep order and never lose a message") {
  FakeClock c;
  FaultConfig f;
  f.drop_rate = 0.2;
  f.duplicate_rate = 0.2;
  f.delay_rate = 0.2;
  f.max_delay_us = 5000;
  f.seed = 42;
  Bus bus(c.clock(), {100, 1u << 20, f});
  auto ev = bus.subscribe("E", "e");
  auto ctl = bus.subscribe("ctl.x", "e");
  for (int i = 0; i < 500; ++i) {
    bus.publish("E", std::to_string(i));
    bus.publish("ctl.x", std::to_string(i));
    c.now += 10;
  }
  c.now += 10'000'000;
  std::vector<int> got;
  while (auto d = bus.poll(ev)) got.push_back(std::stoi(d->message->payload));
  std::set<int> distinct(got.begin(), got.end());
  CHECK(distinct.size() == 500);
  CHECK(std::is_sorted(got.begin(), got.end()));
  CHECK(got.size() > 500);
  auto control = payloads(bus, ctl);
  CHECK(control.size() == 500);
  auto st = bus.stats();
  CHECK(st.duplicated > 0);
  CHECK(st.dropped_then_redelivered > 0);
  CHECK(st.delayed > 0);
}

TEST_CASE("a stopped bus refuses publishes") {
  FakeClock c;
  Bus bus(c.clock());
  bus.stop();
  CHECK(bus.stopped());
  CHECK_THROWS_AS(bus.publish("T", "m"), BusError);
}

TEST_CASE("tap sees every publish") {
  FakeClock c;
  Bus bus(c.clock());
  std::vector<std::string> seen;
  bus.set_tap([&](const Message& m) { seen.push_back(m.topic + "/" + std::to_string(m.offset)); });
  bus.publish("A", "x");
  bus.publish("A", "y");
  bus.publish("ctl.b", "z");
  CHECK(seen == std::vector<std::string>{"A/0", "A/1", "ctl.b/0"});
}

TEST_CASE("concurrent publishers and a polling consumer") {
  Bus bus(steady_clock_us());
  auto s = bus.subscribe("T", "c");
  constexpr int kPer = 2000;
  auto producer = [&](const std::string& id) {
    for (int i = 0; i < kPer; ++i) bus.publish("T", id + ":" + std::to_string(i), id);
  };
  std::thread a(producer, "a"), b(producer, "b");
  std::map<std::string, int> next;
  int n = 0;
  bool ordered = true;
  while (n < 2 * kPer) {
    auto d = bus.poll(s);
    if (!d) {
      std::this_thread::yield();
      continue;
    }
    ++n;
    const auto& m = *d->message;
    ordered = ordered && m.payload == m.publisher + ":" + std::to_string(next[m.publisher]++);
  }
  a.join();
  b.join();
  CHECK(ordered);
  CHECK(n == 2 * kPer);
}
