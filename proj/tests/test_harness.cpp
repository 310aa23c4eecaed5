#include "doctest.h"

#include <filesystem>
#include <random>

#include "ccep/core/evaluator.hpp"
#include "ccep/harness/batch.hpp"
#include "ccep/harness/checks.hpp"
#include "ccep/harness/ridesharing.hpp"
#include "ccep/harness/scenario.hpp"
#include "ccep/harness/simulation.hpp"

using namespace ccep;

namespace {

ScenarioConfig small(std::uint64_t seed = 1) {
  ScenarioConfig c;
  c.name = "small";
  c.duration_s = 40;
  c.tail_s = 40;
  c.ramp = {{0, 20}};
  c.n_clients = 60;
  c.n_drivers = 30;
  c.seed = seed;
  c.worker.seed = seed;
  c.max_workers = 4;
  return c;
}

EventTypeDefinition def_named(const std::string& name) {
  for (auto& d : build_ridesharing_catalog(50, 1))
    if (d.name == name) return d;
  FAIL("missing definition " << name);
  return {};
}

Event make(const std::string& type, const std::string& id, TimeMs t, Attributes a) {
  return Event{type, id, t, "producer", std::move(a)};
}

nlohmann::json comparable_summary(RunSummary s) {
  s.wall_seconds = 0;
  return to_json(s);
}

}  // namespace

TEST_CASE("driver grades 4, 5, 3 average to 4") {
  Evaluator ev(def_named("DriverAvgGrade"));
  auto st = ev.initial_state();
  std::vector<Event> out;
  double grades[] = {4, 5, 3};
  for (int i = 0; i < 3; ++i) {
    auto r = ev.evaluate(make("TripRating", "tr" + std::to_string(i), 1000 * (i + 1),
                              {{"ride_id", text("r" + std::to_string(i))},
                               {"driver_id", text("d7")},
                               {"client_id", text("c1")},
                               {"driver_grade", number(grades[i])},
                               {"client_grade", number(5)}}),
                         st);
    out.insert(out.end(), r.begin(), r.end());
  }
  REQUIRE(out.size() == 1);
  CHECK(std::get<double>(out[0].attributes.at("avg")) == doctest::Approx(4.0));
  CHECK(out[0].occurrence_time == 3000);
}

TEST_CASE("unavailable drivers are never offered") {
  auto cfg = small(9);
  auto events = generate_ridesharing(cfg);
  Evaluator ev(def_named("AvailableDriverOffer"));
  auto st = ev.initial_state();
  std::size_t unavailable = 0, offered = 0;
  for (const auto& e : events) {
    if (e.event_type != "DriverResponse") continue;
    auto out = ev.evaluate(e, st);
    bool ok = std::get<bool>(e.attributes.at("available")) && std::get<double>(e.attributes.at("eta_s")) < 900;
    if (!std::get<bool>(e.attributes.at("available"))) ++unavailable;
    CHECK(out.size() == (ok ? 1u : 0u));
    offered += out.size();
  }
  CHECK(unavailable > 0);
  CHECK(offered > 0);
}

TEST_CASE("scenario parsing and validation") {
  auto cfg = small();
  cfg.faults.push_back({5, FaultAction::Kind::Relocate, "", {"RideMatch"}, {}});
  auto again = scenario_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));

  auto bad = [](auto mutate) {
    auto j = to_json(small());
    mutate(j);
    CHECK_THROWS_AS(scenario_from_json(j), std::invalid_argument);
  };
  bad([](nlohmann::json& j) { j["duration_s"] = 0; });
  bad([](nlohmann::json& j) { j["ramp"] = nlohmann::json::array(); });
  bad([](nlohmann::json& j) { j["initial_workers"] = 0; });
  bad([](nlohmann::json& j) { j["max_workers"] = 0; });

  CHECK(ramp_rate({{0, 10}, {10, 30}}, 5) == doctest::Approx(20));
  CHECK(ramp_rate({{0, 10}, {10, 30}}, 50) == doctest::Approx(30));

  auto ref = reference_of(cfg);
  CHECK(ref.faults.empty());
  CHECK(ref.initial_workers == 1);
  CHECK_FALSE(ref.worker.autonomous);
}

TEST_CASE("percentiles are nearest rank and ordered") {
  CHECK(percentile({}, 50) == 0);
  CHECK(percentile({5, 1, 3, 2, 4}, 50) == 3);
  CHECK(percentile({5, 1, 3, 2, 4}, 100) == 5);
  CHECK(percentile({5, 1, 3, 2, 4}, 1) == 1);
  std::mt19937 rng(3);
  std::exponential_distribution<double> lat(0.1);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(1 + rng() % 200);
    for (auto& x : s) x = lat(rng);
    double p50 = percentile(s, 50), p95 = percentile(s, 95), p99 = percentile(s, 99);
    CHECK(p50 <= p95);
    CHECK(p95 <= p99);
  }
}

TEST_CASE("metrics count each derived id once") {
  MetricsCollector m;
  Event e{"T", "x", 1000, "w", {}};
  CHECK(m.record_detection(e, 1'500'000));
  CHECK_FALSE(m.record_detection(e, 1'600'000));
  m.sample(2'000'000, 1, 0);
  CHECK(m.detections() == 1);
  CHECK(m.repeats() == 1);
  REQUIRE(!m.rows().empty());
  CHECK(m.rows()[0].type == "*");
  CHECK(m.rows()[0].p99 == doctest::Approx(500));
}

TEST_CASE("a run's trace round-trips and compares equal to itself") {
  auto r = run_scenario(small(2));
  CHECK(r.summary.detections > 0);
  for (const auto& row : r.metrics) {
    CHECK(row.p50 <= row.p95);
    CHECK(row.p95 <= row.p99);
  }
  auto path = (std::filesystem::temp_directory_path() / "ccep_trace_roundtrip.jsonl").string();
  r.trace.write_jsonl(path);
  auto back = Trace::read_jsonl(path);
  std::filesystem::remove(path);
  CHECK(back.records.size() == r.trace.records.size());
  CHECK(back.detections() == r.trace.detections());
  CHECK(replay_compare(r.trace, back).empty());

  auto other = back;
  other.header.input_digest = "different";
  auto rep = replay_compare(r.trace, other);
  CHECK_FALSE(rep.comparable);
  CHECK_FALSE(rep.empty());
}

TEST_CASE("identical configs give identical runs") {
  auto a = run_scenario(small(4));
  auto b = run_scenario(small(4));
  REQUIRE(a.trace.records.size() == b.trace.records.size());
  for (std::size_t i = 0; i < a.trace.records.size(); ++i) CHECK(to_json(a.trace.records[i]) == to_json(b.trace.records[i]));
  CHECK(comparable_summary(a.summary) == comparable_summary(b.summary));
}

TEST_CASE("a forced relocation hands a type over without losing detections") {
  auto cfg = small(5);
  cfg.initial_workers = 2;
  cfg.worker.autonomous = false;
  cfg.faults.push_back({10, FaultAction::Kind::Relocate, "", {"EnrichedRideCall"}, {}});
  auto out = run_batch({{cfg, true}}, false).at(0);
  REQUIRE(out.error.empty());
  CHECK(out.run.relocations == 1);
  CHECK(out.diff.empty());
  auto sessions = out.sessions;
  REQUIRE(sessions.size() == 1);
  CHECK(sessions[0].completed);
  CHECK(sessions[0].catalog_messages.empty());
}

TEST_CASE("killing the target mid-handover aborts it and loses nothing") {
  auto cfg = small(6);
  cfg.initial_workers = 2;
  cfg.worker.autonomous = false;
  Simulation sim(cfg);
  sim.run_until(10'000'000);
  auto source = sim.owner_of("EnrichedRideCall");
  REQUIRE(source);
  REQUIRE(sim.relocate({"EnrichedRideCall"}));
  // snapshot collection takes one monitor period; the handover starts right after
  sim.run_until(11'500'000);
  REQUIRE(sim.worker(*source)->busy());
  std::string target;
  for (const auto& id : sim.instances())
    if (id != *source) target = id;
  REQUIRE(!target.empty());
  CHECK(sim.kill(target));
  auto r = sim.run();
  CHECK(r.summary.relocations == 0);
  CHECK(r.summary.failures_detected >= 1);
  auto owner = sim.owner_of("EnrichedRideCall");
  REQUIRE(owner);
  CHECK(*owner != target);
  auto ref = run_scenario(reference_of(cfg));
  auto diff = replay_compare(ref.trace, r.trace);
  CHECK_MESSAGE(diff.empty(), diff.summary());
}

TEST_CASE("overload at the instance ceiling defers instead of spawning") {
  auto cfg = small(7);
  cfg.ramp = {{0, 80}};
  cfg.duration_s = 30;
  cfg.max_workers = 1;
  auto r = run_scenario(cfg);
  CHECK(r.summary.deferrals > 0);
  CHECK(r.summary.max_instances == 1);
  CHECK(r.summary.relocations == 0);
}

TEST_CASE("a freshly spawned worker reports an empty load") {
  Simulation sim(small());
  sim.run_until(3'000'000);
  auto id = sim.spawn_worker();
  REQUIRE(id);
  auto s = sim.worker(*id)->snapshot("probe");
  CHECK(s.F == 0);
  CHECK(s.IC == 0);
  CHECK(s.n_types == 0);
  CHECK(s.worker_id == *id);
}

TEST_CASE("broker duplicates, drops and delays do not change detections") {
  auto cfg = small(8);
  FaultAction f;
  f.at_s = 0;
  f.kind = FaultAction::Kind::Broker;
  f.broker.drop_rate = 0.05;
  f.broker.duplicate_rate = 0.2;
  f.broker.delay_rate = 0.1;
  f.broker.max_delay_us = 50'000;
  f.broker.seed = 3;
  cfg.faults.push_back(f);
  auto out = run_batch({{cfg, true}}, false).at(0);
  REQUIRE(out.error.empty());
  CHECK(out.run.bus.duplicated > 0);
  CHECK(out.run.bus.dropped_then_redelivered > 0);
  CHECK_MESSAGE(out.diff.empty(), out.diff.summary());
}

TEST_CASE("parallel and serial batches agree") {
  auto items = seed_sweep(small(), 20, 3, false);
  auto serial = run_batch(items, false);
  auto parallel = run_batch(items, true);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].error.empty());
    CHECK(comparable_summary(serial[i].run) == comparable_summary(parallel[i].run));
  }
  CHECK(serial[0].run.input_digest != serial[1].run.input_digest);
}
