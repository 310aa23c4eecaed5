#pragma once

// Straight-line transcriptions of the two relocation searches, kept apart from
// the library code: plain arrays, insertion sorts, no shared helpers.

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ccep::oracle {

struct OracleType {
  std::string name;
  std::vector<std::string> inputs;
  double flow = 0;
};

struct OracleResult {
  std::vector<std::string> types;
  double residual = 0;
};

inline bool has_input(const OracleType& t, const std::string& in) {
  for (const auto& x : t.inputs)
    if (x == in) return true;
  return false;
}

inline OracleResult input_similarity(std::vector<OracleType> types, double F, double max_flow,
                                     std::mt19937_64& rng) {
  // instance.eventTypes, visited by name
  for (std::size_t i = 1; i < types.size(); ++i)
    for (std::size_t j = i; j > 0 && types[j].name < types[j - 1].name; --j) std::swap(types[j], types[j - 1]);

  // usesByInput over instance.inputEventTypes
  std::vector<std::string> inputs;
  for (const auto& t : types)
    for (const auto& in : t.inputs) {
      bool seen = false;
      for (const auto& x : inputs) seen = seen || x == in;
      if (!seen) inputs.push_back(in);
    }
  std::vector<std::pair<std::string, int>> pairs;
  for (const auto& in : inputs) {
    int uses = 0;
    for (const auto& t : types)
      if (has_input(t, in)) ++uses;
    pairs.emplace_back(in, uses);
  }
  // OrderByUses, ties by input name
  for (std::size_t i = 1; i < pairs.size(); ++i)
    for (std::size_t j = i; j > 0; --j) {
      auto& a = pairs[j - 1];
      auto& b = pairs[j];
      bool swap = b.second < a.second || (b.second == a.second && b.first < a.first);
      if (!swap) break;
      std::swap(a, b);
    }

  std::vector<bool> chosen(types.size(), false);
  std::size_t n_chosen = 0;
  std::size_t next_pair = 0;
  OracleResult r;
  while (F > max_flow) {
    if (n_chosen == types.size()) break;
    bool random_branch = true;
    if (next_pair < pairs.size()) {
      auto less_used = pairs[next_pair++];
      if (less_used.second < static_cast<int>(types.size())) {
        random_branch = false;
        for (std::size_t i = 0; i < types.size(); ++i) {
          if (chosen[i] || !has_input(types[i], less_used.first)) continue;
          chosen[i] = true;
          ++n_chosen;
          r.types.push_back(types[i].name);
          F -= types[i].flow;
        }
      }
    }
    if (random_branch) {
      std::vector<std::size_t> rest;
      for (std::size_t i = 0; i < types.size(); ++i)
        if (!chosen[i]) rest.push_back(i);
      std::uniform_int_distribution<std::size_t> pick(0, rest.size() - 1);
      auto i = rest[pick(rng)];
      chosen[i] = true;
      ++n_chosen;
      r.types.push_back(types[i].name);
      F -= types[i].flow;
    }
  }
  r.residual = F;
  return r;
}

inline OracleResult resource_usage(std::vector<std::pair<std::string, double>> ecs, double IC, double max) {
  // OrderByConsumptionDesc, ties by name
  for (std::size_t i = 1; i < ecs.size(); ++i)
    for (std::size_t j = i; j > 0; --j) {
      auto& a = ecs[j - 1];
      auto& b = ecs[j];
      bool swap = b.second > a.second || (b.second == a.second && b.first < a.first);
      if (!swap) break;
      std::swap(a, b);
    }
  OracleResult r;
  std::size_t k = 0;
  while (IC > max) {
    if (k == ecs.size()) break;
    r.types.push_back(ecs[k].first);
    IC -= ecs[k].second;
    ++k;
  }
  r.residual = IC;
  return r;
}

/// Random worker instance: 2..20 types over 1..10 input names.
struct RandomInstance {
  std::vector<OracleType> types;
  double F = 0;
  double max_flow = 0;
  std::vector<std::pair<std::string, double>> consumptions;
  double IC = 0;
  double max_resource = 0;
};

inline RandomInstance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  RandomInstance inst;
  int n_types = uniform(2, 20);
  int n_inputs = uniform(1, 10);
  for (int i = 0; i < n_types; ++i) {
    OracleType t;
    t.name = "T" + std::to_string(uniform(0, 999)) + "_" + std::to_string(i);
    int k = uniform(1, std::min(3, n_inputs));
    for (int j = 0; j < k; ++j) {
      auto in = "in" + std::to_string(uniform(0, n_inputs - 1));
      if (!has_input(t, in)) t.inputs.push_back(in);
    }
    t.flow = uniform(0, 400) / 4.0;
    inst.F += t.flow;
    // some equal consumptions so the name tiebreak matters
    double c = uniform(0, 3) == 0 ? 1.0 : uniform(0, 2000);
    inst.consumptions.emplace_back(t.name, c);
    inst.IC += c;
    inst.types.push_back(std::move(t));
  }
  inst.max_flow = inst.F * uniform(0, 100) / 100.0;
  inst.max_resource = inst.IC * uniform(0, 100) / 100.0;
  return inst;
}

}  // namespace ccep::oracle
