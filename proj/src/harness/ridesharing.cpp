#include "ccep/harness/ridesharing.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

namespace ccep {

namespace {

// Mean producer events per ride: call, 1..3 responses, and for rides with an
// available driver (1 - 0.3^k averaged over k) pickup, dropoff and a rating
// 90% of the time.
constexpr double kEventsPerRide = 1.0 + 2.0 + (1.0 - (0.3 + 0.09 + 0.027) / 3.0) * (2.0 + 0.9);

Event make(const char* type, std::string id, TimeMs t, Attributes attrs) {
  return Event{type, std::move(id), t, "producer", std::move(attrs)};
}

EventTypeDefinition parse(const nlohmann::json& j) {
  auto d = definition_from_json(j);
  validate(d);
  return d;
}

}  // namespace

std::vector<std::string> ridesharing_primitives() {
  return {"RideCall", "DriverResponse", "TripEvent", "TripRating"};
}

std::vector<EventTypeDefinition> build_ridesharing_catalog(int n_clients, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x5eedc11e47ULL);
  std::bernoulli_distribution premium(0.25);
  std::uniform_int_distribution<int> zone(0, 9);
  nlohmann::json table = nlohmann::json::object();
  for (int i = 0; i < n_clients; ++i) {
    bool p = premium(rng);
    table["c" + std::to_string(i)] = {{"tier", p ? "premium" : "standard"},
                                      {"home_zone", static_cast<double>(zone(rng))}};
  }
  auto by_ride = [](std::int64_t ms, std::int64_t lateness) {
    return nlohmann::json{{"kind", "semantic"},
                          {"partition_key", "ride_id"},
                          {"window", {{"mode", "sliding"}, {"time_ms", ms}}},
                          {"allowed_lateness_ms", lateness}};
  };
  auto tumbling3 = [](const char* key) {
    return nlohmann::json{{"kind", "semantic"}, {"partition_key", key}, {"window", {{"mode", "tumbling"}, {"count", 3}}}};
  };
  std::vector<EventTypeDefinition> defs;
  defs.push_back(parse({{"name", "EnrichedRideCall"},
                        {"operator", "Enrichment"},
                        {"inputs", {"RideCall"}},
                        {"params", {{"key", "client_id"}, {"table", table}}}}));
  defs.push_back(parse({{"name", "AvailableDriverOffer"},
                        {"operator", "Filtering"},
                        {"inputs", {"DriverResponse"}},
                        {"params", {{"predicate", "available == true && eta_s < 900"}}}}));
  defs.push_back(parse({{"name", "RideMatch"},
                        {"operator", "Composition"},
                        {"inputs", {"EnrichedRideCall", "AvailableDriverOffer"}},
                        {"context", by_ride(60'000, 60'000)}}));
  defs.push_back(parse({{"name", "LateArrival"},
                        {"operator", "PatternDetection"},
                        {"inputs", {"RideMatch", "TripEvent"}},
                        {"params",
                         {{"sequence",
                           {{{"type", "RideMatch"}},
                            {{"type", "TripEvent"}, {"predicate", "phase == \"pickup\" && wait_s > 60"}}}}}},
                        {"context", by_ride(150'000, 60'000)}}));
  defs.push_back(parse({{"name", "SuccessfulDelivery"},
                        {"operator", "PatternDetection"},
                        {"inputs", {"RideMatch", "TripEvent"}},
                        {"params",
                         {{"sequence",
                           {{{"type", "RideMatch"}},
                            {{"type", "TripEvent"}, {"predicate", "phase == \"dropoff\" && completed == true"}}}}}},
                        {"context", by_ride(400'000, 60'000)}}));
  defs.push_back(parse({{"name", "DriverAvgGrade"},
                        {"operator", "Aggregation"},
                        {"inputs", {"TripRating"}},
                        {"params", {{"function", "avg"}, {"attribute", "driver_grade"}}},
                        {"context", tumbling3("driver_id")}}));
  defs.push_back(parse({{"name", "ClientAvgGrade"},
                        {"operator", "Aggregation"},
                        {"inputs", {"TripRating"}},
                        {"params", {{"function", "avg"}, {"attribute", "client_grade"}}},
                        {"context", tumbling3("client_id")}}));
  return defs;
}

std::vector<Event> generate_ridesharing(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> client(0, cfg.n_clients - 1);
  std::uniform_int_distribution<int> driver(0, cfg.n_drivers - 1);
  std::uniform_int_distribution<int> n_responses(1, 3);
  std::uniform_int_distribution<int> grade(1, 5);
  std::bernoulli_distribution available(0.7);
  std::bernoulli_distribution completed(0.9);
  auto between = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  double peak = 0;
  for (const auto& p : cfg.ramp) peak = std::max(peak, p.rate);
  const double peak_rides = peak / kEventsPerRide;
  std::vector<Event> out;
  if (peak_rides <= 0) return out;

  std::exponential_distribution<double> gap(peak_rides);
  std::size_t ride = 0;
  for (double t = gap(rng); t < cfg.duration_s; t += gap(rng)) {
    if (cfg.max_events && out.size() >= *cfg.max_events) break;
    // thinning against the ramp envelope
    if (unit(rng) * peak_rides > ramp_rate(cfg.ramp, t) / kEventsPerRide) continue;
    auto r = "r" + std::to_string(++ride);
    auto c = "c" + std::to_string(client(rng));
    const TimeMs t0 = static_cast<TimeMs>(t * 1000.0);
    out.push_back(make("RideCall", "rc:" + r, t0,
                       {{"ride_id", r},
                        {"client_id", c},
                        {"x", std::floor(unit(rng) * 10000.0) / 100.0},
                        {"y", std::floor(unit(rng) * 10000.0) / 100.0}}));
    int k = n_responses(rng);
    std::string chosen;
    for (int i = 1; i <= k; ++i) {
      auto d = "d" + std::to_string(driver(rng));
      bool ok = available(rng);
      double eta = between(30, 1200);
      if (ok && chosen.empty()) chosen = d;
      out.push_back(make("DriverResponse", "dr:" + r + ":" + std::to_string(i), t0 + between(1000, 20000),
                         {{"ride_id", r}, {"driver_id", d}, {"available", ok}, {"eta_s", eta}}));
    }
    if (chosen.empty()) continue;
    const int wait = between(20, 120);
    const TimeMs pickup = t0 + wait * 1000;
    out.push_back(make("TripEvent", "tp:" + r, pickup,
                       {{"ride_id", r},
                        {"phase", std::string("pickup")},
                        {"wait_s", static_cast<double>(wait)},
                        {"completed", false}}));
    const TimeMs dropoff = pickup + between(60, 240) * 1000;
    const bool done = completed(rng);
    out.push_back(make("TripEvent", "td:" + r, dropoff,
                       {{"ride_id", r},
                        {"phase", std::string("dropoff")},
                        {"wait_s", static_cast<double>(wait)},
                        {"completed", done}}));
    if (!done) continue;
    out.push_back(make("TripRating", "tr:" + r, dropoff + between(1000, 30000),
                       {{"ride_id", r},
                        {"driver_id", chosen},
                        {"client_id", c},
                        {"driver_grade", static_cast<double>(grade(rng))},
                        {"client_grade", static_cast<double>(grade(rng))}}));
  }
  std::sort(out.begin(), out.end(), [](const Event& a, const Event& b) {
    return a.occurrence_time != b.occurrence_time ? a.occurrence_time < b.occurrence_time : a.event_id < b.event_id;
  });
  return out;
}

Workload ridesharing_workload(const ScenarioConfig& cfg) {
  return {ridesharing_primitives(), build_ridesharing_catalog(cfg.n_clients, cfg.seed), generate_ridesharing(cfg)};
}

std::string input_digest(const std::vector<Event>& events) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& e : events) {
    for (unsigned char ch : to_wire(e)) {
      h ^= ch;
      h *= 1099511628211ULL;
    }
    h ^= '\n';
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace ccep
