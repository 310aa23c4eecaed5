#include "ccep/harness/simulation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "ccep/control/messages.hpp"

namespace ccep {

namespace {
constexpr const char* kSim = "sim";
constexpr TimeUs kForever = std::numeric_limits<TimeUs>::max();
constexpr int kRelocateAttempts = 50;
constexpr TimeUs kRelocateRetryUs = 200'000;
}  // namespace

nlohmann::json to_json(const RunSummary& s) {
  return {{"scenario", s.scenario},
          {"seed", s.seed},
          {"strategy", s.strategy},
          {"input_events", s.input_events},
          {"input_digest", s.input_digest},
          {"detections", s.detections},
          {"repeated_publications", s.repeated_publications},
          {"relocations", s.relocations},
          {"sessions", s.sessions},
          {"handovers_aborted", s.handovers_aborted},
          {"deferrals", s.deferrals},
          {"failures_detected", s.failures_detected},
          {"evaluation_errors", s.evaluation_errors},
          {"initial_instances", s.initial_instances},
          {"max_instances", s.max_instances},
          {"final_instances", s.final_instances},
          {"p99_latency_ms", s.p99_latency_ms},
          {"end_us", s.end_us},
          {"wall_seconds", s.wall_seconds},
          {"bus",
           {{"published", s.bus.published},
            {"delivered", s.bus.delivered},
            {"dropped_then_redelivered", s.bus.dropped_then_redelivered},
            {"duplicated", s.bus.duplicated},
            {"delayed", s.bus.delayed}}}};
}

Simulation::Simulation(ScenarioConfig cfg) : Simulation(cfg, ridesharing_workload(cfg)) {}

Simulation::Simulation(ScenarioConfig cfg, Workload workload) : cfg_(std::move(cfg)), workload_(std::move(workload)) {
  validate(cfg_);
  Clock clock = [this] { return now_; };
  bus_ = std::make_unique<Bus>(clock, cfg_.bus);
  store_ = std::make_unique<InMemoryStateStore>(clock, cfg_.store_lag_us);
  catalog_ = std::make_unique<CatalogService>(*bus_, StoreClient(*store_, CatalogService::kId), clock, cfg_.catalog);
  trace_.header = {input_digest(workload_.events), cfg_.seed, cfg_.name, std::string(to_string(cfg_.worker.strategy)),
                   workload_.events.size()};
  bus_->set_tap([this](const Message& m) { tap(m); });
}

Simulation::~Simulation() = default;

void Simulation::tap(const Message& m) {
  if (m.publisher == "producer") return;
  TraceRecord r;
  r.t_us = m.published_at;
  r.topic = m.topic;
  r.offset = m.offset;
  r.publisher = m.publisher;
  if (is_control_topic(m.topic)) {
    r.payload = nlohmann::json::parse(m.payload, nullptr, false);
    r.kind = r.payload.is_object() ? r.payload.value("kind", "unknown") : "unknown";
    // heartbeats dominate the volume and carry nothing the checks use
    if (r.kind == "heartbeat") r.payload = {{"worker_id", r.payload.value("worker_id", "")},
                                            {"lifecycle", r.payload.value("lifecycle", "")}};
  } else {
    auto e = parse_wire(m.payload);
    r.kind = "event";
    r.event_id = std::move(e.event_id);
    r.event_type = std::move(e.event_type);
    r.occurrence_time = e.occurrence_time;
  }
  trace_.records.push_back(std::move(r));
}

void Simulation::schedule(TimeUs at, const std::string& owner, std::function<void()> fn) {
  timers_.push_back({at, ++timer_seq_, owner, std::move(fn)});
  std::push_heap(timers_.begin(), timers_.end(), Later{});
}

bool Simulation::owner_alive(const std::string& owner) const {
  if (!workers_.count(owner)) return true;
  return !dead_.count(owner) && !retired_.count(owner);
}

std::optional<std::string> Simulation::spawn_worker() {
  if (static_cast<int>(instances().size()) >= cfg_.max_workers) return std::nullopt;
  char buf[16];
  std::snprintf(buf, sizeof buf, "w%03d", ++next_worker_);
  std::string id = buf;
  auto wc = cfg_.worker;
  wc.seed = cfg_.seed * 1000003ULL + static_cast<std::uint64_t>(next_worker_);
  auto w = std::make_unique<Worker>(id, *bus_, *store_, *this, wc);
  auto* raw = w.get();
  workers_.emplace(id, std::move(w));
  raw->start();
  return id;
}

void Simulation::retire_worker(const std::string& id) { retired_.insert(id); }

void Simulation::on_detection(const std::string&, const Event& e, TimeUs published_at) {
  metrics_.record_detection(e, published_at);
}

void Simulation::on_relocation_completed(const std::string&, const std::string&, const std::string&) {
  ++relocations_;
}

void Simulation::on_deferral(const std::string&) { ++deferrals_; }

Worker* Simulation::worker(const std::string& id) {
  auto it = workers_.find(id);
  return it == workers_.end() ? nullptr : it->second.get();
}

std::vector<std::string> Simulation::instances() const {
  std::vector<std::string> out;
  for (const auto& [id, w] : workers_)
    if (w->alive() && !retired_.count(id) && w->lifecycle() != control::Lifecycle::Terminated) out.push_back(id);
  return out;
}

std::optional<std::string> Simulation::owner_of(const std::string& type) const {
  for (const auto& [id, w] : workers_) {
    if (!w->alive() || retired_.count(id)) continue;
    auto ts = w->types();
    if (std::find(ts.begin(), ts.end(), type) != ts.end()) return id;
  }
  return std::nullopt;
}

void Simulation::add_fault_record(nlohmann::json payload) {
  TraceRecord r;
  r.t_us = now_;
  r.topic = "harness";
  r.publisher = kSim;
  r.kind = "fault";
  r.payload = std::move(payload);
  trace_.records.push_back(std::move(r));
}

bool Simulation::kill(const std::string& id) {
  auto* w = worker(id);
  if (!w || !w->alive()) return false;
  add_fault_record({{"action", "kill"}, {"worker", id}, {"types", w->types()}});
  w->crash();
  dead_.insert(id);
  return true;
}

bool Simulation::relocate(const std::vector<std::string>& types) {
  if (types.empty()) return false;
  auto owner = owner_of(types.front());
  if (!owner) return false;
  auto* w = worker(*owner);
  if (!w->force_relocation(types)) return false;
  add_fault_record({{"action", "relocate"}, {"worker", *owner}, {"types", types}});
  return true;
}

void Simulation::apply_fault(const FaultAction& f, int attempt) {
  switch (f.kind) {
    case FaultAction::Kind::Kill:
      kill(f.worker);
      return;
    case FaultAction::Kind::KillOwnerOf:
      if (auto owner = owner_of(f.types.front())) kill(*owner);
      return;
    case FaultAction::Kind::Broker:
      bus_->set_faults(f.broker);
      add_fault_record({{"action", "broker"},
                        {"drop_rate", f.broker.drop_rate},
                        {"duplicate_rate", f.broker.duplicate_rate},
                        {"delay_rate", f.broker.delay_rate}});
      return;
    case FaultAction::Kind::Relocate:
      if (relocate(f.types) || attempt + 1 >= kRelocateAttempts) return;
      schedule(now_ + kRelocateRetryUs, kSim, [this, f, attempt] { apply_fault(f, attempt + 1); });
      return;
  }
}

void Simulation::produce() {
  const auto& evs = workload_.events;
  if (cursor_ >= evs.size()) return;
  const TimeMs t = evs[cursor_].occurrence_time;
  while (cursor_ < evs.size() && evs[cursor_].occurrence_time == t) {
    const auto& e = evs[cursor_++];
    bus_->publish(e.event_type, to_wire(e), "producer");
  }
  if (cursor_ < evs.size()) schedule(ms_to_us(evs[cursor_].occurrence_time), kSim, [this] { produce(); });
}

void Simulation::sample_metrics() {
  int n = static_cast<int>(instances().size());
  metrics_.sample(now_, n, relocations_);
  instance_series_.push_back(n);
  schedule(now_ + 1'000'000, kSim, [this] { sample_metrics(); });
}

void Simulation::catalog_tick() {
  catalog_->tick();
  schedule(now_ + cfg_.catalog_tick_us, CatalogService::kId, [this] { catalog_tick(); });
}

void Simulation::start() {
  if (started_) return;
  started_ = true;
  catalog_->start();
  for (int i = 0; i < cfg_.initial_workers; ++i) spawn_worker();
  for (const auto& p : workload_.primitives) catalog_->declare_primitive(p);
  for (const auto& d : workload_.definitions) catalog_->register_event_type(d);
  schedule(cfg_.catalog_tick_us, CatalogService::kId, [this] { catalog_tick(); });
  schedule(1'000'000, kSim, [this] { sample_metrics(); });
  if (!workload_.events.empty())
    schedule(ms_to_us(workload_.events.front().occurrence_time), kSim, [this] { produce(); });
  for (const auto& f : cfg_.faults)
    schedule(static_cast<TimeUs>(f.at_s * 1e6), kSim, [this, f] { apply_fault(f, 0); });
}

TimeUs Simulation::end_time() const {
  TimeMs last = workload_.events.empty() ? 0 : workload_.events.back().occurrence_time;
  last = std::max<TimeMs>(last, static_cast<TimeMs>(cfg_.duration_s * 1000.0));
  return ms_to_us(last) + static_cast<TimeUs>(cfg_.tail_s * 1e6);
}

void Simulation::run_until(TimeUs end) {
  auto wall0 = std::chrono::steady_clock::now();
  start();
  while (true) {
    TimeUs tt = timers_.empty() ? kForever : timers_.front().at;
    auto due = bus_->next_due();
    TimeUs bt = due ? *due : kForever;
    TimeUs next = std::min(tt, bt);
    if (next > end) break;
    if (tt <= bt) {
      std::pop_heap(timers_.begin(), timers_.end(), Later{});
      Timer t = std::move(timers_.back());
      timers_.pop_back();
      now_ = std::max(now_, t.at);
      if (owner_alive(t.owner)) t.fn();
    } else {
      now_ = std::max(now_, bt);
      bus_->dispatch_next(now_);
    }
  }
  now_ = std::max(now_, end);
  wall_seconds_ += std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
}

RunResult Simulation::run() {
  run_until(end_time());
  return result();
}

RunResult Simulation::result() const {
  RunResult r;
  r.config = cfg_;
  r.metrics = metrics_.rows();
  r.trace = trace_;
  auto& s = r.summary;
  s.scenario = cfg_.name;
  s.seed = cfg_.seed;
  s.strategy = std::string(to_string(cfg_.worker.strategy));
  s.input_events = workload_.events.size();
  s.input_digest = trace_.header.input_digest;
  s.detections = metrics_.detections();
  s.repeated_publications = metrics_.repeats();
  s.relocations = relocations_;
  s.deferrals = deferrals_;
  for (const auto& [_, w] : workers_) {
    s.sessions += w->stats().sessions_started;
    s.handovers_aborted += w->stats().handovers_aborted;
    s.evaluation_errors += w->stats().evaluation_errors;
  }
  s.failures_detected = catalog_->stats().failures_detected;
  s.initial_instances = cfg_.initial_workers;
  s.instance_series = instance_series_;
  s.max_instances = cfg_.initial_workers;
  for (int n : instance_series_) s.max_instances = std::max(s.max_instances, n);
  s.final_instances = static_cast<int>(instances().size());
  s.p99_latency_ms = percentile(metrics_.all_latencies(), 99);
  s.end_us = now_;
  s.wall_seconds = wall_seconds_;
  s.bus = bus_->stats();
  return r;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  Simulation sim(cfg);
  return sim.run();
}

void write_run(const RunResult& r, const std::string& dir) {
  std::filesystem::create_directories(dir);
  auto path = [&](const char* name) { return (std::filesystem::path(dir) / name).string(); };
  {
    std::ofstream out(path("metrics.csv"));
    if (!out) throw std::runtime_error("cannot write " + path("metrics.csv"));
    MetricsCollector::write_csv(out, r.metrics);
  }
  r.trace.write_jsonl(path("trace.jsonl"));
  std::ofstream out(path("manifest.json"));
  if (!out) throw std::runtime_error("cannot write " + path("manifest.json"));
  nlohmann::json m{{"tool", "ccep"},
                   {"format", 1},
                   {"seed", r.config.seed},
                   {"input_digest", r.summary.input_digest},
                   {"config", to_json(r.config)},
                   {"summary", to_json(r.summary)}};
  out << m.dump(2) << '\n';
}

}  // namespace ccep
