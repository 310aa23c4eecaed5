#include "doctest.h"

#include "ccep/core/error.hpp"
#include "ccep/statestore/checkpoint.hpp"
#include "ccep/statestore/store.hpp"

using namespace ccep;

namespace {

struct FakeClock {
  TimeUs now = 0;
  Clock clock() {
    return [this] { return now; };
  }
};

Bytes bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }
std::string text(const std::optional<StoreEntry>& e) { return e ? std::string(e->value.begin(), e->value.end()) : "<none>"; }

ContextState sample_state(int n) {
  ContextState s;
  s.owner_type = "Avg";
  for (int i = 0; i < n; ++i)
    s.partitions["p" + std::to_string(i % 3)].push_back(
        Event{"G", "g" + std::to_string(i), i, "t", {{"v", static_cast<double>(i)}}});
  s.max_seen_time = n;
  return s;
}

}  // namespace

TEST_CASE("writes become visible to other clients after the replication lag") {
  FakeClock c;
  InMemoryStateStore store(c.clock(), 100);
  StoreClient a(store, "a"), b(store, "b");
  auto v = a.put("k", bytes("one"));
  CHECK(v == 1);
  CHECK(text(a.get("k")) == "one");
  CHECK_FALSE(b.get("k").has_value());
  c.now = 99;
  CHECK_FALSE(b.get("k").has_value());
  c.now = 100;
  CHECK(text(b.get("k")) == "one");
  CHECK(b.get("k")->version == 1);
}

TEST_CASE("reads are monotone per client") {
  FakeClock c;
  InMemoryStateStore store(c.clock(), 50);
  StoreClient a(store, "a"), b(store, "b");
  a.put("k", bytes("v1"));
  c.now = 60;
  CHECK(text(b.get("k")) == "v1");
  a.put("k", bytes("v2"));
  c.now = 70;
  CHECK(text(b.get("k")) == "v1");
  c.now = 110;
  CHECK(text(b.get("k")) == "v2");
  // a writer keeps seeing its own newest write even when another one is pending
  b.put("k", bytes("v3"));
  CHECK(text(a.get("k")) == "v2");
  CHECK(text(b.get("k")) == "v3");
}

TEST_CASE("delete writes a tombstone and bumps the version") {
  FakeClock c;
  InMemoryStateStore store(c.clock());
  StoreClient a(store, "a");
  a.put("meta/X", bytes("x"));
  a.put("meta/Y", bytes("y"));
  a.put("ctx/X", bytes("c"));
  CHECK(a.keys("meta/") == std::vector<std::string>{"meta/X", "meta/Y"});
  a.remove("meta/X");
  CHECK_FALSE(a.get("meta/X").has_value());
  CHECK(a.keys("meta/") == std::vector<std::string>{"meta/Y"});
  CHECK(a.put("meta/X", bytes("again")) == 3);
}

TEST_CASE("last checkpoint wins") {
  FakeClock c;
  InMemoryStateStore store(c.clock());
  StoreClient a(store, "w1"), b(store, "w2");
  a.checkpoint_context("Avg", sample_state(3));
  b.checkpoint_context("Avg", sample_state(5));
  auto got = a.load_context("Avg");
  REQUIRE(got.has_value());
  CHECK(*got == sample_state(5));
  CHECK_FALSE(a.load_context("Nope").has_value());
}

TEST_CASE("checkpoints round-trip with offsets, ids and a readable header") {
  TypeCheckpoint cp{sample_state(10), {{"G", 42}, {"H", 7}}, {"g1", "g2"}, 3};
  auto enc = encode_checkpoint(cp);
  CHECK(decode_checkpoint(enc) == cp);
  CHECK(peek_buffered_count(enc) == 10);
  CHECK(decode_checkpoint(encode_checkpoint(TypeCheckpoint{})) == TypeCheckpoint{});
}

TEST_CASE("corrupt checkpoints are rejected") {
  TypeCheckpoint cp{sample_state(4), {{"G", 1}}, {}, 1};
  auto enc = encode_checkpoint(cp);
  SUBCASE("bad magic") {
    enc[0] = 'X';
    CHECK_THROWS_AS(decode_checkpoint(enc), DecodeError);
    CHECK_THROWS_AS(peek_buffered_count(enc), DecodeError);
  }
  SUBCASE("truncated body") {
    enc.resize(enc.size() - 3);
    CHECK_THROWS_AS(decode_checkpoint(enc), DecodeError);
  }
  SUBCASE("short header") {
    Bytes tiny(enc.begin(), enc.begin() + 6);
    CHECK_THROWS_AS(peek_buffered_count(tiny), DecodeError);
  }
  SUBCASE("header disagrees with body") {
    enc[4] = static_cast<std::uint8_t>(enc[4] + 1);
    CHECK_THROWS_AS(decode_checkpoint(enc), DecodeError);
  }
  SUBCASE("load_context surfaces corruption") {
    FakeClock c;
    InMemoryStateStore store(c.clock());
    StoreClient a(store, "a");
    a.put(ctx_key("T"), bytes("garbage"));
    CHECK_THROWS_AS(a.load_context("T"), DecodeError);
  }
}

TEST_CASE("store rejects bad arguments") {
  FakeClock c;
  CHECK_THROWS(InMemoryStateStore(c.clock(), -1));
  InMemoryStateStore store(c.clock());
  CHECK_THROWS(store.put("a", "", {}));
}
