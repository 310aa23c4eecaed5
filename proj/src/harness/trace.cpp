#include "ccep/harness/trace.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ccep {

nlohmann::json to_json(const TraceRecord& r) {
  nlohmann::json j{{"t_us", r.t_us},         {"topic", r.topic}, {"offset", r.offset},
                   {"publisher", r.publisher}, {"kind", r.kind}};
  if (!r.event_id.empty()) {
    j["event_id"] = r.event_id;
    j["event_type"] = r.event_type;
    j["occurrence_time"] = r.occurrence_time;
  }
  if (!r.payload.is_null()) j["payload"] = r.payload;
  return j;
}

TraceRecord trace_record_from_json(const nlohmann::json& j) {
  TraceRecord r;
  r.t_us = j.at("t_us").get<TimeUs>();
  r.topic = j.at("topic").get<std::string>();
  r.offset = j.value("offset", std::uint64_t{0});
  r.publisher = j.value("publisher", "");
  r.kind = j.at("kind").get<std::string>();
  r.event_id = j.value("event_id", "");
  r.event_type = j.value("event_type", "");
  r.occurrence_time = j.value("occurrence_time", TimeMs{0});
  if (j.contains("payload")) r.payload = j.at("payload");
  return r;
}

std::set<Detection> Trace::detections() const {
  std::set<Detection> out;
  for (const auto& r : records)
    if (r.kind == "event") out.emplace(r.event_type, r.event_id);
  return out;
}

std::map<std::string, std::size_t> Trace::counts_by_type() const {
  std::map<std::string, std::size_t> out;
  for (const auto& [type, _] : detections()) ++out[type];
  return out;
}

void Trace::write_jsonl(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << nlohmann::json{{"kind", "header"},
                        {"input_digest", header.input_digest},
                        {"seed", header.seed},
                        {"scenario", header.scenario},
                        {"strategy", header.strategy},
                        {"input_events", header.input_events}}
             .dump()
      << '\n';
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

Trace Trace::read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Trace t;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
      throw std::runtime_error(path + ":" + std::to_string(n) + ": not a JSON object");
    try {
      if (n == 1 && j.value("kind", "") == "header") {
        t.header.input_digest = j.value("input_digest", "");
        t.header.seed = j.value("seed", std::uint64_t{0});
        t.header.scenario = j.value("scenario", "");
        t.header.strategy = j.value("strategy", "");
        t.header.input_events = j.value("input_events", std::uint64_t{0});
        continue;
      }
      t.records.push_back(trace_record_from_json(j));
    } catch (const nlohmann::json::exception& ex) {
      throw std::runtime_error(path + ":" + std::to_string(n) + ": " + ex.what());
    }
  }
  return t;
}

std::string CompareReport::summary() const {
  std::ostringstream s;
  if (!comparable) {
    s << "not comparable: " << reason;
    return s.str();
  }
  if (empty()) {
    s << "identical detections";
    return s.str();
  }
  s << only_a.size() << " only in a, " << only_b.size() << " only in b";
  for (const auto& [type, d] : count_delta) s << "; " << type << " " << (d > 0 ? "+" : "") << d;
  return s.str();
}

CompareReport replay_compare(const Trace& a, const Trace& b) {
  CompareReport r;
  if (a.header.input_digest != b.header.input_digest || a.header.input_events != b.header.input_events) {
    r.comparable = false;
    r.reason = "input streams differ (digest " + a.header.input_digest + " vs " + b.header.input_digest + ")";
    return r;
  }
  auto da = a.detections();
  auto db = b.detections();
  std::set_difference(da.begin(), da.end(), db.begin(), db.end(), std::back_inserter(r.only_a));
  std::set_difference(db.begin(), db.end(), da.begin(), da.end(), std::back_inserter(r.only_b));
  auto ca = a.counts_by_type();
  auto cb = b.counts_by_type();
  std::set<std::string> types;
  for (const auto& [t, _] : ca) types.insert(t);
  for (const auto& [t, _] : cb) types.insert(t);
  for (const auto& t : types) {
    auto d = static_cast<long long>(cb[t]) - static_cast<long long>(ca[t]);
    if (d != 0) r.count_delta[t] = d;
  }
  return r;
}

}  // namespace ccep
