#include "ccep/worker/relocation.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <stdexcept>

namespace ccep {

std::string to_string(Strategy s) {
  return s == Strategy::InputSimilarity ? "input_similarity" : "resource_usage";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "input_similarity") return Strategy::InputSimilarity;
  if (s == "resource_usage") return Strategy::ResourceUsage;
  throw std::invalid_argument("unknown strategy '" + s + "'");
}

SearchResult search_types_by_input_similarity(std::vector<TypeFlow> types, double F, double max_flow,
                                              std::mt19937_64& rng) {
  std::sort(types.begin(), types.end(), [](const TypeFlow& a, const TypeFlow& b) { return a.name < b.name; });

  std::map<std::string, int> uses_by_input;
  for (const auto& t : types)
    for (const auto& in : t.inputs) uses_by_input.emplace(in, 0);
  for (auto& [input, uses] : uses_by_input)
    for (const auto& t : types)
      if (std::find(t.inputs.begin(), t.inputs.end(), input) != t.inputs.end()) ++uses;

  std::vector<std::pair<std::string, int>> pairs(uses_by_input.begin(), uses_by_input.end());
  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
  std::deque<std::pair<std::string, int>> ordered(pairs.begin(), pairs.end());

  SearchResult r;
  std::set<std::string> selected;
  auto unselected = [&] {
    std::vector<const TypeFlow*> out;
    for (const auto& t : types)
      if (!selected.count(t.name)) out.push_back(&t);
    return out;
  };
  auto take = [&](const TypeFlow& t) {
    selected.insert(t.name);
    r.types.push_back(t.name);
    F -= t.flow;
  };

  while (F > max_flow) {
    auto remaining = unselected();
    if (remaining.empty()) break;
    if (!ordered.empty()) {
      auto less_used = ordered.front();
      ordered.pop_front();
      if (less_used.second < static_cast<int>(types.size())) {
        for (const auto& t : types) {
          if (selected.count(t.name)) continue;
          if (std::find(t.inputs.begin(), t.inputs.end(), less_used.first) != t.inputs.end()) take(t);
        }
        continue;
      }
    }
    std::uniform_int_distribution<std::size_t> pick(0, remaining.size() - 1);
    take(*remaining[pick(rng)]);
  }
  r.residual = F;
  return r;
}

SearchResult search_types_by_resource_usage(std::vector<std::pair<std::string, double>> consumptions, double IC,
                                            double max) {
  std::sort(consumptions.begin(), consumptions.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::deque<std::pair<std::string, double>> ordered(consumptions.begin(), consumptions.end());
  SearchResult r;
  while (IC > max && !ordered.empty()) {
    auto biggest = ordered.front();
    ordered.pop_front();
    r.types.push_back(biggest.first);
    IC -= biggest.second;
  }
  r.residual = IC;
  return r;
}

std::optional<std::string> choose_target_worker(const std::vector<control::LoadSnapshot>& snapshots,
                                                const TargetQuery& q) {
  const control::LoadSnapshot* best = nullptr;
  for (const auto& s : snapshots) {
    if (s.worker_id == q.requester || s.busy || s.lifecycle != control::Lifecycle::Active) continue;
    if (s.timestamp < q.min_timestamp) continue;
    if (std::find(q.exclude.begin(), q.exclude.end(), s.worker_id) != q.exclude.end()) continue;
    double load = q.strategy == Strategy::InputSimilarity ? s.F : s.IC;
    if (!(load + q.need < q.threshold)) continue;
    if (!best || s.IC < best->IC || (s.IC == best->IC && s.worker_id < best->worker_id)) best = &s;
  }
  if (!best) return std::nullopt;
  return best->worker_id;
}

}  // namespace ccep
