#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ccep/bus/bus.hpp"
#include "ccep/catalog/service.hpp"
#include "ccep/control/runtime.hpp"
#include "ccep/harness/metrics.hpp"
#include "ccep/harness/ridesharing.hpp"
#include "ccep/harness/scenario.hpp"
#include "ccep/harness/trace.hpp"
#include "ccep/statestore/store.hpp"
#include "ccep/worker/worker.hpp"

namespace ccep {

struct RunSummary {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string strategy;
  std::size_t input_events = 0;
  std::string input_digest;
  std::uint64_t detections = 0;
  std::uint64_t repeated_publications = 0;
  std::uint64_t relocations = 0;
  std::uint64_t sessions = 0;
  std::uint64_t handovers_aborted = 0;
  std::uint64_t deferrals = 0;
  std::uint64_t failures_detected = 0;
  std::uint64_t evaluation_errors = 0;
  int initial_instances = 0;
  int max_instances = 0;
  int final_instances = 0;
  /// One point per simulated second.
  std::vector<int> instance_series;
  double p99_latency_ms = 0;
  TimeUs end_us = 0;
  double wall_seconds = 0;
  BusStats bus;
};

nlohmann::json to_json(const RunSummary& s);

struct RunResult {
  ScenarioConfig config;
  RunSummary summary;
  std::vector<MetricsRow> metrics;
  Trace trace;
};

/// A whole cluster on one virtual clock: bus, store, cataloger, workers and
/// the producer. Timers and bus deliveries run in time order; on a tie the
/// timer goes first. Single-threaded and deterministic for a given config.
class Simulation final : public Runtime {
 public:
  explicit Simulation(ScenarioConfig cfg);
  Simulation(ScenarioConfig cfg, Workload workload);
  ~Simulation() override;

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Starts workers and the cataloger, registers the catalog and arms the
  /// producer, metrics and fault timers. Called by the first run_until.
  void start();
  void run_until(TimeUs t);
  /// Runs to the end of the input plus the tail.
  RunResult run();
  RunResult result() const;
  TimeUs end_time() const;

  // Runtime
  TimeUs now() const override { return now_; }
  void schedule(TimeUs at, const std::string& owner, std::function<void()> fn) override;
  std::optional<std::string> spawn_worker() override;
  void retire_worker(const std::string& id) override;
  void on_detection(const std::string& worker, const Event& e, TimeUs published_at) override;
  void on_relocation_completed(const std::string& type, const std::string& from, const std::string& to) override;
  void on_deferral(const std::string& worker) override;

  Bus& bus() { return *bus_; }
  StateStore& store() { return *store_; }
  CatalogService& catalog() { return *catalog_; }
  const Workload& workload() const { return workload_; }
  const Trace& trace() const { return trace_; }
  const MetricsCollector& metrics() const { return metrics_; }

  Worker* worker(const std::string& id);
  /// Workers that are alive and not terminated.
  std::vector<std::string> instances() const;
  std::optional<std::string> owner_of(const std::string& type) const;
  /// Crash without notice; records a fault in the trace.
  bool kill(const std::string& id);
  /// One forced relocation attempt of types owned by a single worker.
  bool relocate(const std::vector<std::string>& types);
  std::uint64_t relocations() const { return relocations_; }

 private:
  struct Timer {
    TimeUs at;
    std::uint64_t seq;
    std::string owner;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Timer& a, const Timer& b) const { return a.at != b.at ? a.at > b.at : a.seq > b.seq; }
  };

  void tap(const Message& m);
  void produce();
  void sample_metrics();
  void catalog_tick();
  void apply_fault(const FaultAction& f, int attempt);
  bool owner_alive(const std::string& owner) const;
  void add_fault_record(nlohmann::json payload);

  ScenarioConfig cfg_;
  Workload workload_;
  TimeUs now_ = 0;
  std::uint64_t timer_seq_ = 0;
  std::vector<Timer> timers_;
  bool started_ = false;

  std::unique_ptr<Bus> bus_;
  std::unique_ptr<InMemoryStateStore> store_;
  std::unique_ptr<CatalogService> catalog_;
  std::map<std::string, std::unique_ptr<Worker>> workers_;
  std::set<std::string> dead_;
  std::set<std::string> retired_;
  int next_worker_ = 0;

  std::size_t cursor_ = 0;
  MetricsCollector metrics_;
  Trace trace_;
  std::uint64_t relocations_ = 0;
  std::uint64_t deferrals_ = 0;
  std::vector<int> instance_series_;
  double wall_seconds_ = 0;
};

RunResult run_scenario(const ScenarioConfig& cfg);

/// Writes metrics.csv, trace.jsonl and manifest.json into `dir`, creating it.
void write_run(const RunResult& r, const std::string& dir);

}  // namespace ccep
