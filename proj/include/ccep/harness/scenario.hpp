#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccep/bus/bus.hpp"
#include "ccep/catalog/service.hpp"
#include "ccep/worker/worker.hpp"

namespace ccep {

/// Producer events per second at t_s; linear in between, flat after the last point.
struct RampPoint {
  double t_s = 0;
  double rate = 0;
};

struct FaultAction {
  enum class Kind { Kill, KillOwnerOf, Relocate, Broker };
  double at_s = 0;
  Kind kind = Kind::Kill;
  std::string worker;
  std::vector<std::string> types;
  FaultConfig broker;
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration_s = 60;
  /// Extra simulated time after the last ride starts, for follow-up events and drain.
  double tail_s = 450;
  std::vector<RampPoint> ramp{{0, 10}};
  int n_clients = 200;
  int n_drivers = 80;
  std::uint64_t seed = 1;
  int initial_workers = 1;
  int max_workers = 64;
  TimeUs store_lag_us = 0;
  TimeUs catalog_tick_us = 50'000;
  CatalogServiceConfig catalog;
  BusConfig bus{1'000, 1u << 22, {}};
  WorkerConfig worker;
  std::vector<FaultAction> faults;
  /// Stop generating rides once this many producer events exist.
  std::optional<std::size_t> max_events;
};

double ramp_rate(const std::vector<RampPoint>& ramp, double t_s);

/// Throws std::invalid_argument naming the first problem found.
void validate(const ScenarioConfig& cfg);

nlohmann::json to_json(const ScenarioConfig& cfg);
/// Missing fields keep their defaults. Validates the result.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

/// Same workload and seed on a single worker that never relocates, with
/// no faults: the baseline for detection comparisons.
ScenarioConfig reference_of(const ScenarioConfig& cfg);

}  // namespace ccep
