#pragma once

#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ccep/control/messages.hpp"

namespace ccep {

enum class Strategy { InputSimilarity, ResourceUsage };
std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct TypeFlow {
  std::string name;
  std::vector<std::string> inputs;
  double flow = 0;
};

struct SearchResult {
  std::vector<std::string> types;
  /// F or IC left after subtracting the selected types.
  double residual = 0;
};

/// Types whose inputs are least shared are picked first; when the least used
/// input is shared by every type a random unselected type is picked instead.
/// Inputs are ordered by (uses, name) and types are visited by name. Stops
/// once F <= max_flow or nothing is left to pick.
SearchResult search_types_by_input_similarity(std::vector<TypeFlow> types, double F, double max_flow,
                                              std::mt19937_64& rng);

/// Largest consumers first, ties by name, until IC <= max.
SearchResult search_types_by_resource_usage(std::vector<std::pair<std::string, double>> consumptions, double IC,
                                            double max);

struct TargetQuery {
  std::string requester;
  double need = 0;
  double threshold = 0;
  Strategy strategy = Strategy::InputSimilarity;
  /// Snapshots older than this are ignored.
  TimeUs min_timestamp = 0;
  std::vector<std::string> exclude;
};

/// Feasible candidates are active, idle, fresh, not the requester and have
/// load + need < threshold, where load is F or IC according to the strategy.
/// Returns the feasible one with the smallest (IC, worker_id).
std::optional<std::string> choose_target_worker(const std::vector<control::LoadSnapshot>& snapshots,
                                                const TargetQuery& q);

}  // namespace ccep
