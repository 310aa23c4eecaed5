#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ccep/core/context_state.hpp"
#include "ccep/core/definition.hpp"
#include "ccep/core/event.hpp"

namespace ccep {

/// Partition id of `e` under `spec`:
///   semantic - the key attribute's canonical string,
///   spatial  - "floor(x/cell):floor(y/cell)",
///   temporal - the tumbling bucket index for time-tumbling windows, "*" otherwise.
/// Throws EvaluationError when a referenced attribute is missing or not numeric.
std::string partition_id(const ContextSpec& spec, const Event& e);

/// Compiled event-type definition. Construction parses and checks operator
/// parameters (throws DefinitionError); evaluate is then cheap and pure apart
/// from the ContextState it is handed.
///
/// Operator semantics:
///   Filtering        predicate gate, attributes pass through unchanged.
///   Projection       keep only the listed attributes.
///   Translation      ordered attribute rewrites (copy, rename, set, add, sub,
///                    mul, div, concat).
///   Division         one output per satisfied branch predicate, tagged with the
///                    branch label.
///   Enrichment       merge of a static lookup table keyed by one attribute.
///   Aggregation      sum/avg/min/max/count over a count or time window.
///   Composition      key-equality join of the two inputs within the window.
///   PatternDetection ordered sequence of typed steps within a time bound.
///
/// Derived events carry occurrence_time of the latest contributing input. Ids
/// come from derived_event_id over the trigger; for Composition and
/// PatternDetection the trigger is the '|'-joined constituent ids in step order,
/// which keeps the id independent of arrival order.
class Evaluator {
 public:
  explicit Evaluator(EventTypeDefinition def);

  const EventTypeDefinition& definition() const { return def_; }
  const std::string& name() const { return def_.name; }
  bool stateful() const { return !is_stateless(def_.op); }

  /// Throws EvaluationError for a per-event failure; the state is left
  /// untouched in that case.
  std::vector<Event> evaluate(const Event& input, ContextState& state) const;

  ContextState initial_state() const;

  struct Kernel;

 private:
  EventTypeDefinition def_;
  std::shared_ptr<const Kernel> kernel_;
};

/// One-shot convenience wrapper that compiles `def` on every call.
std::vector<Event> evaluate(const EventTypeDefinition& def, const Event& input, ContextState& state);

}  // namespace ccep
