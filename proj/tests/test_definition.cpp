#include "doctest.h"

#include "ccep/core/definition.hpp"
#include "ccep/core/error.hpp"

using namespace ccep;

namespace {
nlohmann::json filter_json() {
  return {{"name", "Fast"}, {"operator", "Filtering"}, {"inputs", {"Car"}},
          {"params", {{"predicate", "speed > 80"}}}};
}
}  // namespace

TEST_CASE("definition round-trips through JSON") {
  auto def = definition_from_json(filter_json());
  CHECK(def.op == Operator::Filtering);
  CHECK(definition_from_json(to_json(def)) == def);

  auto agg = definition_from_json(nlohmann::json::parse(R"({
    "name":"DriverAvgGrade","operator":"Aggregation","inputs":["TripRating"],
    "params":{"function":"avg","attribute":"driver_grade"},
    "context":{"kind":"semantic","partition_key":"driver_id","window":{"mode":"tumbling","count":3}},
    "output_attributes":{"avg":"number"}})"));
  CHECK(agg.context->window->count == 3);
  CHECK(definition_from_json(to_json(agg)) == agg);
}

TEST_CASE("definition invariants are enforced") {
  auto j = filter_json();
  j["operator"] = "Teleport";
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["inputs"] = nlohmann::json::array();
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["inputs"] = {"Fast"};
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["inputs"] = {"A", "B"};
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["context"] = {{"kind", "semantic"}, {"partition_key", "k"}};
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["name"] = "ctl.sneaky";
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  j = filter_json();
  j["params"] = {{"predicate", "speed >"}};
  CHECK_THROWS_AS(definition_from_json(j), DefinitionError);

  auto agg = nlohmann::json::parse(R"({"name":"S","operator":"Aggregation","inputs":["X"],
    "params":{"function":"sum","attribute":"v"}})");
  CHECK_THROWS_AS(definition_from_json(agg), DefinitionError);
  agg["context"] = {{"kind", "temporal"}, {"window", {{"mode", "tumbling"}, {"time_ms", 0}}}};
  CHECK_THROWS_AS(definition_from_json(agg), DefinitionError);
  agg["context"] = {{"kind", "spatial"}, {"grid", {{"cell", 0}, {"x", "x"}, {"y", "y"}}},
                    {"window", {{"mode", "tumbling"}, {"count", 2}}}};
  CHECK_THROWS_AS(definition_from_json(agg), DefinitionError);
  agg["context"] = {{"kind", "semantic"}, {"partition_key", ""}, {"window", {{"count", 2}}}};
  CHECK_THROWS_AS(definition_from_json(agg), DefinitionError);

  auto comp = nlohmann::json::parse(R"({"name":"J","operator":"Composition","inputs":["A"],
    "context":{"kind":"semantic","partition_key":"k","window":{"time_ms":10}}})");
  CHECK_THROWS_AS(definition_from_json(comp), DefinitionError);
  comp["inputs"] = {"A", "B"};
  CHECK_NOTHROW(definition_from_json(comp));
}
