#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ccep {

enum class Operator {
  Filtering,
  Projection,
  Translation,
  Division,
  Enrichment,
  Aggregation,
  Composition,
  PatternDetection,
};

std::string_view to_string(Operator op);
/// Throws DefinitionError for unknown names.
Operator operator_from_string(std::string_view name);
bool is_stateless(Operator op);

enum class ContextKind { Temporal, Spatial, Semantic };
enum class WindowMode { Tumbling, Sliding };

/// Exactly one of `count` and `time_ms` is set.
struct WindowSpec {
  WindowMode mode = WindowMode::Tumbling;
  std::optional<std::int64_t> count;
  std::optional<std::int64_t> time_ms;

  bool count_based() const { return count.has_value(); }
  std::int64_t length() const { return count ? *count : *time_ms; }
  bool operator==(const WindowSpec&) const = default;
};

struct GridSpec {
  double cell = 0;
  std::string x_attribute;
  std::string y_attribute;
  bool operator==(const GridSpec&) const = default;
};

struct ContextSpec {
  ContextKind kind = ContextKind::Semantic;
  std::optional<WindowSpec> window;
  std::string partition_key;
  std::optional<GridSpec> grid;
  /// Extra event-time slack granted to out-of-order events in time windows.
  std::int64_t allowed_lateness_ms = 0;
  bool operator==(const ContextSpec&) const = default;
};

struct EventTypeDefinition {
  std::string name;
  Operator op = Operator::Filtering;
  /// Ordered, duplicate-free.
  std::vector<std::string> inputs;
  nlohmann::json params = nlohmann::json::object();
  std::optional<ContextSpec> context;
  /// Declared output schema, attribute name -> "number" | "string" | "bool".
  std::map<std::string, std::string> output_attributes;

  bool operator==(const EventTypeDefinition&) const = default;
};

/// Structural checks plus operator parameter compilation. Throws DefinitionError.
void validate(const EventTypeDefinition& def);

nlohmann::json to_json(const ContextSpec& c);
ContextSpec context_from_json(const nlohmann::json& j);
nlohmann::json to_json(const EventTypeDefinition& def);
/// Parses and validates. Throws DefinitionError.
EventTypeDefinition definition_from_json(const nlohmann::json& j);

}  // namespace ccep
