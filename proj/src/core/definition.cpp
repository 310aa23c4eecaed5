#include "ccep/core/definition.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "ccep/core/error.hpp"
#include "ccep/core/evaluator.hpp"

namespace ccep {

namespace {

constexpr std::array<std::pair<Operator, std::string_view>, 8> kOperatorNames{{
    {Operator::Filtering, "Filtering"},
    {Operator::Projection, "Projection"},
    {Operator::Translation, "Translation"},
    {Operator::Division, "Division"},
    {Operator::Enrichment, "Enrichment"},
    {Operator::Aggregation, "Aggregation"},
    {Operator::Composition, "Composition"},
    {Operator::PatternDetection, "PatternDetection"},
}};

std::string_view kind_name(ContextKind k) {
  switch (k) {
    case ContextKind::Temporal: return "temporal";
    case ContextKind::Spatial: return "spatial";
    case ContextKind::Semantic: return "semantic";
  }
  return "semantic";
}

}  // namespace

std::string_view to_string(Operator op) {
  for (const auto& [o, n] : kOperatorNames)
    if (o == op) return n;
  return "?";
}

Operator operator_from_string(std::string_view name) {
  for (const auto& [o, n] : kOperatorNames)
    if (n == name) return o;
  throw DefinitionError("unknown operator '" + std::string(name) + "'");
}

bool is_stateless(Operator op) {
  return op != Operator::Aggregation && op != Operator::Composition &&
         op != Operator::PatternDetection;
}

void validate(const EventTypeDefinition& def) {
  if (def.name.empty()) throw DefinitionError("event type name must be non-empty");
  if (def.name.rfind("ctl.", 0) == 0)
    throw DefinitionError("event type names may not use the reserved 'ctl.' prefix");
  if (def.inputs.empty()) throw DefinitionError(def.name + ": inputs must be non-empty");
  std::set<std::string> seen;
  for (const auto& in : def.inputs) {
    if (in.empty()) throw DefinitionError(def.name + ": empty input name");
    if (!seen.insert(in).second) throw DefinitionError(def.name + ": duplicate input '" + in + "'");
  }
  if (seen.count(def.name)) throw DefinitionError(def.name + ": a type cannot be its own input");

  if (is_stateless(def.op)) {
    if (def.context) throw DefinitionError(def.name + ": stateless operators take no context");
    if (def.inputs.size() != 1)
      throw DefinitionError(def.name + ": " + std::string(to_string(def.op)) +
                            " requires exactly one input");
  } else {
    if (!def.context) throw DefinitionError(def.name + ": stateful operators require a context");
    const auto& c = *def.context;
    if (c.window && c.window->length() <= 0)
      throw DefinitionError(def.name + ": window length must be > 0");
    if (c.window && c.window->count.has_value() == c.window->time_ms.has_value())
      throw DefinitionError(def.name + ": window needs exactly one of count or time_ms");
    if (c.kind == ContextKind::Semantic && c.partition_key.empty())
      throw DefinitionError(def.name + ": semantic context needs a partition_key");
    if (c.kind == ContextKind::Spatial &&
        (!c.grid || c.grid->cell <= 0 || c.grid->x_attribute.empty() || c.grid->y_attribute.empty()))
      throw DefinitionError(def.name + ": spatial context needs a grid with cell > 0");
    if (c.kind == ContextKind::Temporal && !c.window)
      throw DefinitionError(def.name + ": temporal context needs a window");
    if (c.allowed_lateness_ms < 0) throw DefinitionError(def.name + ": negative allowed lateness");
    if (def.op == Operator::Composition && def.inputs.size() != 2)
      throw DefinitionError(def.name + ": Composition requires exactly two inputs");
  }
  // Operator parameters are checked by compiling them.
  (void)Evaluator(def);
}

nlohmann::json to_json(const ContextSpec& c) {
  nlohmann::json j{{"kind", kind_name(c.kind)}};
  if (c.window) {
    nlohmann::json w{{"mode", c.window->mode == WindowMode::Tumbling ? "tumbling" : "sliding"}};
    if (c.window->count) w["count"] = *c.window->count;
    if (c.window->time_ms) w["time_ms"] = *c.window->time_ms;
    j["window"] = w;
  }
  if (!c.partition_key.empty()) j["partition_key"] = c.partition_key;
  if (c.grid) j["grid"] = {{"cell", c.grid->cell}, {"x", c.grid->x_attribute}, {"y", c.grid->y_attribute}};
  if (c.allowed_lateness_ms) j["allowed_lateness_ms"] = c.allowed_lateness_ms;
  return j;
}

ContextSpec context_from_json(const nlohmann::json& j) {
  try {
    ContextSpec c;
    auto kind = j.at("kind").get<std::string>();
    if (kind == "temporal") c.kind = ContextKind::Temporal;
    else if (kind == "spatial") c.kind = ContextKind::Spatial;
    else if (kind == "semantic") c.kind = ContextKind::Semantic;
    else throw DefinitionError("unknown context kind '" + kind + "'");
    if (auto w = j.find("window"); w != j.end()) {
      WindowSpec ws;
      auto mode = w->value("mode", std::string("tumbling"));
      if (mode == "tumbling") ws.mode = WindowMode::Tumbling;
      else if (mode == "sliding") ws.mode = WindowMode::Sliding;
      else throw DefinitionError("unknown window mode '" + mode + "'");
      if (w->contains("count")) ws.count = w->at("count").get<std::int64_t>();
      if (w->contains("time_ms")) ws.time_ms = w->at("time_ms").get<std::int64_t>();
      if (ws.count.has_value() == ws.time_ms.has_value())
        throw DefinitionError("window needs exactly one of count or time_ms");
      c.window = ws;
    }
    c.partition_key = j.value("partition_key", std::string{});
    if (auto g = j.find("grid"); g != j.end())
      c.grid = GridSpec{g->at("cell").get<double>(), g->at("x").get<std::string>(),
                        g->at("y").get<std::string>()};
    c.allowed_lateness_ms = j.value("allowed_lateness_ms", std::int64_t{0});
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw DefinitionError(std::string("bad context: ") + ex.what());
  }
}

nlohmann::json to_json(const EventTypeDefinition& def) {
  nlohmann::json j{{"name", def.name},
                   {"operator", to_string(def.op)},
                   {"inputs", def.inputs},
                   {"params", def.params}};
  if (def.context) j["context"] = to_json(*def.context);
  if (!def.output_attributes.empty()) j["output_attributes"] = def.output_attributes;
  return j;
}

EventTypeDefinition definition_from_json(const nlohmann::json& j) {
  EventTypeDefinition def;
  try {
    def.name = j.at("name").get<std::string>();
    def.op = operator_from_string(j.at("operator").get<std::string>());
    def.inputs = j.at("inputs").get<std::vector<std::string>>();
    def.params = j.value("params", nlohmann::json::object());
    if (auto c = j.find("context"); c != j.end() && !c->is_null()) def.context = context_from_json(*c);
    if (auto o = j.find("output_attributes"); o != j.end())
      def.output_attributes = o->get<std::map<std::string, std::string>>();
  } catch (const nlohmann::json::exception& ex) {
    throw DefinitionError(std::string("bad event type definition: ") + ex.what());
  }
  validate(def);
  return def;
}

}  // namespace ccep
