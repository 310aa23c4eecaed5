#include "ccep/harness/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ccep {

double percentile(std::vector<double> sample, double q) {
  if (sample.empty()) return 0;
  std::sort(sample.begin(), sample.end());
  auto rank = static_cast<std::size_t>(std::ceil(q / 100.0 * static_cast<double>(sample.size())));
  rank = std::clamp<std::size_t>(rank, 1, sample.size());
  return sample[rank - 1];
}

bool MetricsCollector::record_detection(const Event& e, TimeUs published_at) {
  if (!seen_.insert(e.event_id).second) {
    ++repeats_;
    return false;
  }
  double latency = static_cast<double>(published_at) / 1000.0 - static_cast<double>(e.occurrence_time);
  pending_[e.event_type].push_back(latency);
  all_.push_back(latency);
  return true;
}

void MetricsCollector::sample(TimeUs now, int instances, std::uint64_t relocations) {
  double span_s = static_cast<double>(now - last_sample_) / 1e6;
  if (span_s <= 0) span_s = 1;
  last_sample_ = now;
  const double ts = static_cast<double>(now) / 1e6;
  std::vector<double> every;
  for (const auto& [_, v] : pending_) every.insert(every.end(), v.begin(), v.end());
  auto row = [&](const std::string& type, const std::vector<double>& v) {
    rows_.push_back({ts, type, percentile(v, 50), percentile(v, 95), percentile(v, 99),
                     static_cast<double>(v.size()) / span_s, instances, relocations});
  };
  row("*", every);
  for (const auto& [type, v] : pending_)
    if (!v.empty()) row(type, v);
  pending_.clear();
}

void MetricsCollector::write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << "timestamp,type,p50,p95,p99,throughput,instances,relocations\n";
  for (const auto& r : rows)
    out << r.timestamp << ',' << r.type << ',' << r.p50 << ',' << r.p95 << ',' << r.p99 << ',' << r.throughput
        << ',' << r.instances << ',' << r.relocations << '\n';
}

}  // namespace ccep
