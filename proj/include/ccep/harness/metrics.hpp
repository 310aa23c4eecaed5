#pragma once

#include <cstdint>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ccep/core/clock.hpp"
#include "ccep/core/event.hpp"

namespace ccep {

/// One metrics.csv line. `type` is "*" for the all-types row.
struct MetricsRow {
  double timestamp = 0;
  std::string type;
  double p50 = 0;
  double p95 = 0;
  double p99 = 0;
  double throughput = 0;
  int instances = 0;
  std::uint64_t relocations = 0;
};

/// Nearest-rank percentile, q in (0, 100]. 0 for an empty sample.
double percentile(std::vector<double> sample, double q);

/// Per-second detection latency and throughput. Each derived event id counts
/// once, at its first publication.
class MetricsCollector {
 public:
  /// False for a repeat of an id already seen.
  bool record_detection(const Event& e, TimeUs published_at);
  /// Closes the interval ending at `now` and appends its rows.
  void sample(TimeUs now, int instances, std::uint64_t relocations);

  const std::vector<MetricsRow>& rows() const { return rows_; }
  std::uint64_t detections() const { return seen_.size(); }
  std::uint64_t repeats() const { return repeats_; }
  /// Latencies over the whole run, ms.
  const std::vector<double>& all_latencies() const { return all_; }

  static void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

 private:
  std::set<std::string> seen_;
  std::uint64_t repeats_ = 0;
  std::map<std::string, std::vector<double>> pending_;
  std::vector<double> all_;
  std::vector<MetricsRow> rows_;
  TimeUs last_sample_ = 0;
};

}  // namespace ccep
