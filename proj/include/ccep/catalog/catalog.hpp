#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccep/control/messages.hpp"
#include "ccep/core/definition.hpp"
#include "ccep/statestore/store.hpp"

namespace ccep {

class CatalogError : public std::runtime_error {
 public:
  enum class Kind { Conflict, Validation, NotFound, Dependency };
  CatalogError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct CatalogRecord {
  std::string name;
  /// Absent for primitive, producer-fed types.
  std::optional<EventTypeDefinition> definition;
  std::set<std::string> consumers;
  /// Empty while unassigned.
  std::string assigned_worker;
  std::vector<std::string> webhooks;
  std::uint64_t version = 1;
  std::uint64_t assignment_epoch = 0;
  /// Input offsets at registration time, where detection begins.
  std::map<std::string, std::uint64_t> start_offsets;

  bool primitive() const { return !definition.has_value(); }
};

nlohmann::json to_json(const CatalogRecord& r);
CatalogRecord catalog_record_from_json(const nlohmann::json& j);

/// Registry of event types. Not synchronized; CatalogService serializes access.
/// Every change is written through to the store under meta/{name}, and a
/// catalog built over a populated store picks the records back up.
class Catalog {
 public:
  explicit Catalog(StoreClient store);

  const CatalogRecord& declare_primitive(const std::string& name);
  const CatalogRecord& register_event_type(const EventTypeDefinition& def,
                                           const std::vector<std::string>& webhooks = {},
                                           std::map<std::string, std::uint64_t> start_offsets = {});
  const CatalogRecord& update_event_type(const std::string& name, const EventTypeDefinition& def);
  void delete_event_type(const std::string& name);
  const CatalogRecord& add_webhook(const std::string& name, const std::string& url);

  /// Applies if epoch is not older than the recorded one. Returns whether it applied.
  bool record_assignment(const std::string& name, const std::string& worker_id, std::uint64_t epoch);
  const CatalogRecord& lookup_metadata(const std::string& name) const;
  bool contains(const std::string& name) const { return records_.count(name) != 0; }

  /// One request per derived type assigned to the worker. Pure with respect
  /// to catalog state, so repeated calls give identical requests.
  std::vector<control::AssignmentRequest> handle_worker_failure(const std::string& worker_id) const;
  control::AssignmentRequest initial_request(const std::string& name) const;

  std::vector<std::string> names() const;
  /// Derived types only, inputs before consumers.
  std::vector<std::string> topological_order() const;

 private:
  CatalogRecord& find(const std::string& name);
  void check_inputs(const EventTypeDefinition& def) const;
  bool reaches(const std::string& from, const std::string& to) const;
  void persist(const CatalogRecord& r);

  StoreClient store_;
  std::map<std::string, CatalogRecord> records_;
};

}  // namespace ccep
