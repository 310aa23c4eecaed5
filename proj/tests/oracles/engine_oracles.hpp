#pragma once

// Brute-force recomputation oracles for the windowed operators. They work on
// the whole input stream at once and never touch the evaluator's buffers.

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ccep/core/evaluator.hpp"

namespace ccep::oracle {

struct Emission {
  std::string id;
  double value = 0;
  bool operator==(const Emission&) const = default;
};

inline std::string key_of(const Event& e, const std::string& attr) {
  return to_key_string(e.attributes.at(attr));
}

inline double mean_by_summation(const std::vector<Event>& window, const std::string& attr) {
  double s = 0;
  for (const auto& e : window) s += std::get<double>(e.attributes.at(attr));
  return s / static_cast<double>(window.size());
}

/// Tumbling count window of n per partition key, average of `attr`.
inline std::vector<Emission> tumbling_count_avg(const std::string& type, const std::vector<Event>& stream,
                                                const std::string& key, const std::string& attr,
                                                std::size_t n) {
  std::map<std::string, std::vector<Event>> seen;
  std::vector<Emission> out;
  for (const auto& e : stream) {
    auto& part = seen[key_of(e, key)];
    part.push_back(e);
    if (part.size() % n == 0) {
      std::vector<Event> window(part.end() - static_cast<std::ptrdiff_t>(n), part.end());
      out.push_back({derived_event_id(type, e.event_id, 0), mean_by_summation(window, attr)});
    }
  }
  return out;
}

/// Sliding count window of n per partition key, average of `attr`.
inline std::vector<Emission> sliding_count_avg(const std::string& type, const std::vector<Event>& stream,
                                               const std::string& key, const std::string& attr,
                                               std::size_t n) {
  std::map<std::string, std::vector<Event>> seen;
  std::vector<Emission> out;
  for (const auto& e : stream) {
    auto& part = seen[key_of(e, key)];
    part.push_back(e);
    if (part.size() >= n) {
      std::vector<Event> window(part.end() - static_cast<std::ptrdiff_t>(n), part.end());
      out.push_back({derived_event_id(type, e.event_id, 0), mean_by_summation(window, attr)});
    }
  }
  return out;
}

/// Sliding time window of `len` ms per partition key over a time-ordered
/// stream: the window of event i is every same-key event j <= i with
/// t_j > t_i - len.
inline std::vector<Emission> sliding_time_sum(const std::string& type, const std::vector<Event>& stream,
                                              const std::string& key, const std::string& attr,
                                              std::int64_t len) {
  std::vector<Emission> out;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const auto& e = stream[i];
    double s = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      const auto& b = stream[j];
      if (key_of(b, key) == key_of(e, key) && b.occurrence_time > e.occurrence_time - len)
        s += std::get<double>(b.attributes.at(attr));
    }
    out.push_back({derived_event_id(type, e.event_id, 0), s});
  }
  return out;
}

/// Every same-key (left, right) pair with |t_l - t_r| <= len.
inline std::set<std::string> composition_pairs(const std::string& type, const std::vector<Event>& stream,
                                               const std::string& left, const std::string& right,
                                               const std::string& key, std::int64_t len) {
  std::set<std::string> ids;
  for (const auto& l : stream) {
    if (l.event_type != left) continue;
    for (const auto& r : stream) {
      if (r.event_type != right || key_of(l, key) != key_of(r, key)) continue;
      auto d = l.occurrence_time - r.occurrence_time;
      if (d < 0) d = -d;
      if (d <= len) ids.insert(derived_event_id(type, l.event_id + "|" + r.event_id, 0));
    }
  }
  return ids;
}

/// Every ordered same-key pair (a, b) with a of type `first` satisfying
/// `first_ok`, b of type `second`, a before b in (time, id) order and
/// t_b - t_a <= bound.
template <typename Pred>
std::set<std::string> sequence_pairs(const std::string& type, const std::vector<Event>& stream,
                                     const std::string& first, const std::string& second,
                                     const std::string& key, std::int64_t bound, Pred first_ok) {
  std::set<std::string> ids;
  for (const auto& a : stream) {
    if (a.event_type != first || !first_ok(a)) continue;
    for (const auto& b : stream) {
      if (b.event_type != second || key_of(a, key) != key_of(b, key)) continue;
      bool before = a.occurrence_time < b.occurrence_time ||
                    (a.occurrence_time == b.occurrence_time && a.event_id < b.event_id);
      if (before && b.occurrence_time - a.occurrence_time <= bound)
        ids.insert(derived_event_id(type, a.event_id + "|" + b.event_id, 0));
    }
  }
  return ids;
}

/// Small random stream: `n` events over `types`, keys from k0..k{keys-1},
/// non-decreasing times with random gaps, numeric attribute `v` in [1, 5].
inline std::vector<Event> random_stream(std::uint64_t seed, std::size_t n,
                                        const std::vector<std::string>& types, int keys,
                                        std::int64_t max_gap_ms) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> type_pick(0, static_cast<int>(types.size()) - 1);
  std::uniform_int_distribution<int> key_pick(0, keys - 1);
  std::uniform_int_distribution<std::int64_t> gap(0, max_gap_ms);
  std::uniform_int_distribution<int> val(1, 5);
  std::bernoulli_distribution flag(0.5);
  std::vector<Event> out;
  TimeMs t = 0;
  for (std::size_t i = 0; i < n; ++i) {
    t += gap(rng);
    Event e;
    e.event_type = types[static_cast<std::size_t>(type_pick(rng))];
    e.event_id = "e" + std::to_string(seed) + "-" + std::to_string(i);
    e.occurrence_time = t;
    e.source_id = "test";
    e.attributes["k"] = "k" + std::to_string(key_pick(rng));
    e.attributes["v"] = static_cast<double>(val(rng));
    e.attributes["ok"] = flag(rng);
    out.push_back(std::move(e));
  }
  return out;
}

/// Runs the whole stream through a fresh evaluator.
inline std::vector<Event> run_stream(const Evaluator& ev, const std::vector<Event>& stream) {
  auto st = ev.initial_state();
  std::vector<Event> out;
  for (const auto& e : stream) {
    auto derived = ev.evaluate(e, st);
    out.insert(out.end(), derived.begin(), derived.end());
  }
  return out;
}

inline EventTypeDefinition windowed_definition(const std::string& json_text) {
  return definition_from_json(nlohmann::json::parse(json_text));
}

/// Outcome of one randomized engine trial.
struct TrialResult {
  bool ok = true;
  std::string detail;
};

inline TrialResult aggregation_trial(std::uint64_t seed) {
  auto stream = random_stream(seed, 1 + seed % 200, {"G"}, 4, 1000);
  auto tumbling = Evaluator(windowed_definition(
      R"({"name":"Avg","operator":"Aggregation","inputs":["G"],
          "params":{"function":"avg","attribute":"v"},
          "context":{"kind":"semantic","partition_key":"k","window":{"mode":"tumbling","count":3}}})"));
  auto sliding = Evaluator(windowed_definition(
      R"({"name":"SAvg","operator":"Aggregation","inputs":["G"],
          "params":{"function":"avg","attribute":"v"},
          "context":{"kind":"semantic","partition_key":"k","window":{"mode":"sliding","count":4}}})"));
  auto timed = Evaluator(windowed_definition(
      R"({"name":"TSum","operator":"Aggregation","inputs":["G"],
          "params":{"function":"sum","attribute":"v","output":"total"},
          "context":{"kind":"semantic","partition_key":"k","window":{"mode":"sliding","time_ms":2500}}})"));
  auto check = [](const std::vector<Event>& got, const std::vector<Emission>& want,
                  const std::string& out_attr) {
    if (got.size() != want.size()) return false;
    for (std::size_t i = 0; i < got.size(); ++i) {
      double v = std::get<double>(got[i].attributes.at(out_attr));
      if (got[i].event_id != want[i].id) return false;
      if (std::abs(v - want[i].value) > 1e-9) return false;
    }
    return true;
  };
  TrialResult r;
  if (!check(run_stream(tumbling, stream), tumbling_count_avg("Avg", stream, "k", "v", 3), "avg"))
    r = {false, "tumbling count avg mismatch"};
  else if (!check(run_stream(sliding, stream), sliding_count_avg("SAvg", stream, "k", "v", 4), "avg"))
    r = {false, "sliding count avg mismatch"};
  else if (!check(run_stream(timed, stream), sliding_time_sum("TSum", stream, "k", "v", 2500), "total"))
    r = {false, "sliding time sum mismatch"};
  return r;
}

inline std::set<std::string> ids_of(const std::vector<Event>& evs) {
  std::set<std::string> s;
  for (const auto& e : evs) s.insert(e.event_id);
  return s;
}

inline TrialResult composition_trial(std::uint64_t seed) {
  auto stream = random_stream(seed, 1 + seed % 200, {"L", "R"}, 5, 800);
  auto ev = Evaluator(windowed_definition(
      R"({"name":"Join","operator":"Composition","inputs":["L","R"],
          "context":{"kind":"semantic","partition_key":"k","window":{"mode":"sliding","time_ms":2000}}})"));
  auto got = run_stream(ev, stream);
  auto want = composition_pairs("Join", stream, "L", "R", "k", 2000);
  if (got.size() != want.size() || ids_of(got) != want) return {false, "composition pair set mismatch"};
  return {};
}

inline TrialResult pattern_trial(std::uint64_t seed) {
  auto stream = random_stream(seed, 1 + seed % 200, {"A", "B", "C"}, 4, 900);
  auto ev = Evaluator(windowed_definition(
      R"({"name":"Seq","operator":"PatternDetection","inputs":["A","B"],
          "params":{"sequence":[{"type":"A","predicate":"ok == true"},{"type":"B"}]},
          "context":{"kind":"semantic","partition_key":"k","window":{"mode":"sliding","time_ms":3000}}})"));
  std::vector<Event> filtered;
  for (const auto& e : stream)
    if (e.event_type != "C") filtered.push_back(e);
  auto got = run_stream(ev, filtered);
  auto want = sequence_pairs("Seq", filtered, "A", "B", "k", 3000,
                             [](const Event& a) { return std::get<bool>(a.attributes.at("ok")); });
  if (got.size() != want.size() || ids_of(got) != want) return {false, "pattern pair set mismatch"};
  return {};
}

}  // namespace ccep::oracle
