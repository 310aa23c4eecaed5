#include "ccep/harness/scenario.hpp"

#include <fstream>
#include <stdexcept>

namespace ccep {

namespace {

std::string kind_name(FaultAction::Kind k) {
  switch (k) {
    case FaultAction::Kind::Kill:
      return "kill";
    case FaultAction::Kind::KillOwnerOf:
      return "kill_owner_of";
    case FaultAction::Kind::Relocate:
      return "relocate";
    case FaultAction::Kind::Broker:
      return "broker";
  }
  return "kill";
}

FaultAction::Kind kind_from(const std::string& s) {
  if (s == "kill") return FaultAction::Kind::Kill;
  if (s == "kill_owner_of") return FaultAction::Kind::KillOwnerOf;
  if (s == "relocate") return FaultAction::Kind::Relocate;
  if (s == "broker") return FaultAction::Kind::Broker;
  throw std::invalid_argument("unknown fault action '" + s + "'");
}

TimeUs ms(const nlohmann::json& j, const char* key, TimeUs current_us) {
  if (!j.contains(key)) return current_us;
  return static_cast<TimeUs>(j.at(key).get<double>() * 1000.0);
}

nlohmann::json broker_json(const FaultConfig& f) {
  return {{"drop_rate", f.drop_rate},
          {"duplicate_rate", f.duplicate_rate},
          {"delay_rate", f.delay_rate},
          {"max_delay_ms", static_cast<double>(f.max_delay_us) / 1000.0},
          {"redelivery_timeout_ms", static_cast<double>(f.redelivery_timeout_us) / 1000.0},
          {"seed", f.seed}};
}

FaultConfig broker_from(const nlohmann::json& j, FaultConfig f) {
  f.drop_rate = j.value("drop_rate", f.drop_rate);
  f.duplicate_rate = j.value("duplicate_rate", f.duplicate_rate);
  f.delay_rate = j.value("delay_rate", f.delay_rate);
  f.max_delay_us = ms(j, "max_delay_ms", f.max_delay_us);
  f.redelivery_timeout_us = ms(j, "redelivery_timeout_ms", f.redelivery_timeout_us);
  f.seed = j.value("seed", f.seed);
  return f;
}

}  // namespace

double ramp_rate(const std::vector<RampPoint>& ramp, double t_s) {
  if (ramp.empty()) return 0;
  if (t_s <= ramp.front().t_s) return ramp.front().rate;
  for (std::size_t i = 1; i < ramp.size(); ++i) {
    const auto& a = ramp[i - 1];
    const auto& b = ramp[i];
    if (t_s <= b.t_s) {
      if (b.t_s == a.t_s) return b.rate;
      return a.rate + (b.rate - a.rate) * (t_s - a.t_s) / (b.t_s - a.t_s);
    }
  }
  return ramp.back().rate;
}

void validate(const ScenarioConfig& c) {
  auto fail = [](const std::string& m) { throw std::invalid_argument("scenario: " + m); };
  if (!(c.duration_s > 0)) fail("duration_s must be > 0");
  if (c.tail_s < 0) fail("tail_s must be >= 0");
  if (c.ramp.empty()) fail("ramp needs at least one point");
  for (std::size_t i = 0; i < c.ramp.size(); ++i) {
    if (c.ramp[i].rate < 0) fail("ramp rates must be >= 0");
    if (i > 0 && c.ramp[i].t_s < c.ramp[i - 1].t_s) fail("ramp times must be non-decreasing");
  }
  if (c.n_clients < 1 || c.n_drivers < 1) fail("n_clients and n_drivers must be >= 1");
  if (c.initial_workers < 1) fail("initial_workers must be >= 1");
  if (c.max_workers < c.initial_workers) fail("max_workers must be >= initial_workers");
  const auto& w = c.worker;
  if (!(w.max_flow > 0 && w.min_flow > 0 && w.max_resource > 0)) fail("thresholds must be > 0");
  if (!(w.min_flow < w.max_flow)) fail("min_flow must be < max_flow");
  if (w.monitor_period_us <= 0 || w.flow_window_us <= 0 || w.heartbeat_us <= 0) fail("periods must be > 0");
  if (w.comparison_timeout_us <= 0 || w.comparison_timeout_us >= w.handover_timeout_us)
    fail("comparison_timeout_ms must be in (0, handover_timeout_ms)");
  if (w.checkpoint_interval < 1) fail("checkpoint_interval must be >= 1");
  if (!(w.scale_in_headroom > 0 && w.scale_in_headroom <= 1)) fail("scale_in_headroom must be in (0, 1]");
  for (double r : {c.bus.faults.drop_rate, c.bus.faults.duplicate_rate, c.bus.faults.delay_rate})
    if (r < 0 || r > 1) fail("fault rates must be in [0, 1]");
  for (const auto& f : c.faults) {
    if (f.at_s < 0) fail("fault times must be >= 0");
    if (f.kind == FaultAction::Kind::Kill && f.worker.empty()) fail("kill needs a worker");
    if ((f.kind == FaultAction::Kind::KillOwnerOf || f.kind == FaultAction::Kind::Relocate) && f.types.empty())
      fail(kind_name(f.kind) + " needs a type");
  }
}

nlohmann::json to_json(const ScenarioConfig& c) {
  auto ramp = nlohmann::json::array();
  for (const auto& p : c.ramp) ramp.push_back({{"t_s", p.t_s}, {"rate", p.rate}});
  auto faults = nlohmann::json::array();
  for (const auto& f : c.faults) {
    nlohmann::json j{{"at_s", f.at_s}, {"action", kind_name(f.kind)}};
    if (!f.worker.empty()) j["worker"] = f.worker;
    if (!f.types.empty()) j["types"] = f.types;
    if (f.kind == FaultAction::Kind::Broker) j.update(broker_json(f.broker));
    faults.push_back(std::move(j));
  }
  const auto& w = c.worker;
  nlohmann::json j{
      {"name", c.name},
      {"duration_s", c.duration_s},
      {"tail_s", c.tail_s},
      {"ramp", ramp},
      {"n_clients", c.n_clients},
      {"n_drivers", c.n_drivers},
      {"seed", c.seed},
      {"strategy", to_string(w.strategy)},
      {"initial_workers", c.initial_workers},
      {"max_workers", c.max_workers},
      {"store_lag_ms", static_cast<double>(c.store_lag_us) / 1000.0},
      {"catalog",
       {{"heartbeat_ms", static_cast<double>(c.catalog.heartbeat_us) / 1000.0},
        {"missed_heartbeats", c.catalog.missed_heartbeats},
        {"request_timeout_ms", static_cast<double>(c.catalog.request_timeout_us) / 1000.0},
        {"tick_ms", static_cast<double>(c.catalog_tick_us) / 1000.0}}},
      {"bus", broker_json(c.bus.faults)},
      {"relocation",
       {{"max_flow", w.max_flow},
        {"min_flow", w.min_flow},
        {"max_resource", w.max_resource},
        {"monitor_period_ms", static_cast<double>(w.monitor_period_us) / 1000.0},
        {"flow_window_ms", static_cast<double>(w.flow_window_us) / 1000.0},
        {"comparison_window", w.comparison_window},
        {"handover_timeout_ms", static_cast<double>(w.handover_timeout_us) / 1000.0},
        {"comparison_timeout_ms", static_cast<double>(w.comparison_timeout_us) / 1000.0},
        {"checkpoint_interval", w.checkpoint_interval},
        {"cooldown_periods", w.cooldown_periods},
        {"scale_in_headroom", w.scale_in_headroom},
        {"idle_periods_before_exit", w.idle_periods_before_exit},
        {"assign_wait_ms", static_cast<double>(w.assign_wait_us) / 1000.0},
        {"eval_cost_us", w.eval_cost_us},
        {"autonomous", w.autonomous}}},
      {"faults", faults}};
  j["bus"]["latency_us"] = c.bus.latency_us;
  if (c.max_events) j["max_events"] = *c.max_events;
  return j;
}

ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  ScenarioConfig c;
  try {
    c.name = j.value("name", c.name);
    c.duration_s = j.value("duration_s", c.duration_s);
    c.tail_s = j.value("tail_s", c.tail_s);
    if (j.contains("ramp")) {
      c.ramp.clear();
      for (const auto& p : j.at("ramp")) {
        if (p.is_array())
          c.ramp.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        else
          c.ramp.push_back({p.at("t_s").get<double>(), p.at("rate").get<double>()});
      }
    }
    c.n_clients = j.value("n_clients", c.n_clients);
    c.n_drivers = j.value("n_drivers", c.n_drivers);
    c.seed = j.value("seed", c.seed);
    c.initial_workers = j.value("initial_workers", c.initial_workers);
    c.max_workers = j.value("max_workers", c.max_workers);
    c.store_lag_us = ms(j, "store_lag_ms", c.store_lag_us);
    if (j.contains("max_events")) c.max_events = j.at("max_events").get<std::size_t>();
    if (j.contains("strategy")) c.worker.strategy = strategy_from_string(j.at("strategy").get<std::string>());
    if (j.contains("catalog")) {
      const auto& k = j.at("catalog");
      c.catalog.heartbeat_us = ms(k, "heartbeat_ms", c.catalog.heartbeat_us);
      c.catalog.missed_heartbeats = k.value("missed_heartbeats", c.catalog.missed_heartbeats);
      c.catalog.request_timeout_us = ms(k, "request_timeout_ms", c.catalog.request_timeout_us);
      c.catalog_tick_us = ms(k, "tick_ms", c.catalog_tick_us);
    }
    if (j.contains("bus")) {
      const auto& b = j.at("bus");
      c.bus.latency_us = b.value("latency_us", c.bus.latency_us);
      c.bus.faults = broker_from(b, c.bus.faults);
    }
    if (j.contains("relocation")) {
      const auto& r = j.at("relocation");
      auto& w = c.worker;
      w.max_flow = r.value("max_flow", w.max_flow);
      w.min_flow = r.value("min_flow", w.min_flow);
      w.max_resource = r.value("max_resource", w.max_resource);
      w.monitor_period_us = ms(r, "monitor_period_ms", w.monitor_period_us);
      w.flow_window_us = ms(r, "flow_window_ms", w.flow_window_us);
      w.comparison_window = r.value("comparison_window", w.comparison_window);
      w.handover_timeout_us = ms(r, "handover_timeout_ms", w.handover_timeout_us);
      w.comparison_timeout_us = ms(r, "comparison_timeout_ms", w.comparison_timeout_us);
      w.checkpoint_interval = r.value("checkpoint_interval", w.checkpoint_interval);
      w.cooldown_periods = r.value("cooldown_periods", w.cooldown_periods);
      w.scale_in_headroom = r.value("scale_in_headroom", w.scale_in_headroom);
      w.idle_periods_before_exit = r.value("idle_periods_before_exit", w.idle_periods_before_exit);
      w.assign_wait_us = ms(r, "assign_wait_ms", w.assign_wait_us);
      w.eval_cost_us = r.value("eval_cost_us", w.eval_cost_us);
      w.autonomous = r.value("autonomous", w.autonomous);
    }
    if (j.contains("faults")) {
      for (const auto& f : j.at("faults")) {
        FaultAction a;
        a.at_s = f.at("at_s").get<double>();
        a.kind = kind_from(f.at("action").get<std::string>());
        a.worker = f.value("worker", "");
        if (f.contains("types")) a.types = f.at("types").get<std::vector<std::string>>();
        if (f.contains("type")) a.types.push_back(f.at("type").get<std::string>());
        if (a.kind == FaultAction::Kind::Broker) a.broker = broker_from(f, c.bus.faults);
        c.faults.push_back(std::move(a));
      }
    }
  } catch (const nlohmann::json::exception& ex) {
    throw std::invalid_argument(std::string("scenario: ") + ex.what());
  }
  c.worker.heartbeat_us = c.catalog.heartbeat_us;
  c.worker.missed_heartbeats = c.catalog.missed_heartbeats;
  c.worker.seed = c.seed;
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open scenario " + path);
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("scenario " + path + " is not valid JSON");
  return scenario_from_json(j);
}

ScenarioConfig reference_of(const ScenarioConfig& cfg) {
  auto r = cfg;
  r.name = cfg.name + "-reference";
  r.faults.clear();
  r.bus.faults = FaultConfig{};
  r.initial_workers = 1;
  r.worker.autonomous = false;
  return r;
}

}  // namespace ccep
