#include "ccep/catalog/catalog.hpp"

#include <functional>

#include "ccep/core/error.hpp"

namespace ccep {

namespace {

Bytes to_bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

std::string request_id(const std::string& name, std::uint64_t epoch) {
  return name + "@" + std::to_string(epoch);
}

}  // namespace

nlohmann::json to_json(const CatalogRecord& r) {
  nlohmann::json j{{"name", r.name},
                   {"primitive", r.primitive()},
                   {"consumers", r.consumers},
                   {"assigned_worker", r.assigned_worker},
                   {"webhooks", r.webhooks},
                   {"version", r.version},
                   {"assignment_epoch", r.assignment_epoch},
                   {"start_offsets", r.start_offsets}};
  if (r.definition) j["definition"] = to_json(*r.definition);
  return j;
}

CatalogRecord catalog_record_from_json(const nlohmann::json& j) {
  try {
    CatalogRecord r;
    r.name = j.at("name").get<std::string>();
    if (j.contains("definition")) r.definition = definition_from_json(j.at("definition"));
    r.consumers = j.value("consumers", std::set<std::string>{});
    r.assigned_worker = j.value("assigned_worker", "");
    r.webhooks = j.value("webhooks", std::vector<std::string>{});
    r.version = j.value("version", std::uint64_t{1});
    r.assignment_epoch = j.value("assignment_epoch", std::uint64_t{0});
    r.start_offsets = j.value("start_offsets", std::map<std::string, std::uint64_t>{});
    return r;
  } catch (const nlohmann::json::exception& ex) {
    throw DecodeError(std::string("catalog record: ") + ex.what());
  }
}

Catalog::Catalog(StoreClient store) : store_(std::move(store)) {
  for (const auto& key : store_.keys("meta/")) {
    auto e = store_.get(key);
    if (!e) continue;
    auto r = catalog_record_from_json(nlohmann::json::parse(e->value.begin(), e->value.end()));
    records_[r.name] = std::move(r);
  }
}

void Catalog::persist(const CatalogRecord& r) { store_.put(meta_key(r.name), to_bytes(to_json(r).dump())); }

CatalogRecord& Catalog::find(const std::string& name) {
  auto it = records_.find(name);
  if (it == records_.end()) throw CatalogError(CatalogError::Kind::NotFound, "unknown event type " + name);
  return it->second;
}

const CatalogRecord& Catalog::lookup_metadata(const std::string& name) const {
  auto it = records_.find(name);
  if (it == records_.end()) throw CatalogError(CatalogError::Kind::NotFound, "unknown event type " + name);
  return it->second;
}

const CatalogRecord& Catalog::declare_primitive(const std::string& name) {
  if (name.empty() || name.rfind("ctl.", 0) == 0)
    throw CatalogError(CatalogError::Kind::Validation, "invalid primitive type name '" + name + "'");
  auto [it, fresh] = records_.try_emplace(name);
  if (!fresh) {
    if (!it->second.primitive())
      throw CatalogError(CatalogError::Kind::Conflict, name + " is already a derived type");
    return it->second;
  }
  it->second.name = name;
  persist(it->second);
  return it->second;
}

void Catalog::check_inputs(const EventTypeDefinition& def) const {
  try {
    validate(def);
  } catch (const DefinitionError& ex) {
    throw CatalogError(CatalogError::Kind::Validation, ex.what());
  }
  for (const auto& in : def.inputs) {
    if (in == def.name) throw CatalogError(CatalogError::Kind::Validation, def.name + " lists itself as input");
    if (!records_.count(in))
      throw CatalogError(CatalogError::Kind::Validation, def.name + ": unknown input type " + in);
  }
}

bool Catalog::reaches(const std::string& from, const std::string& to) const {
  // walks input edges backwards from `from`
  std::set<std::string> seen;
  std::function<bool(const std::string&)> visit = [&](const std::string& n) {
    if (n == to) return true;
    if (!seen.insert(n).second) return false;
    const auto& r = records_.at(n);
    if (!r.definition) return false;
    for (const auto& in : r.definition->inputs)
      if (visit(in)) return true;
    return false;
  };
  return visit(from);
}

const CatalogRecord& Catalog::register_event_type(const EventTypeDefinition& def,
                                                  const std::vector<std::string>& webhooks,
                                                  std::map<std::string, std::uint64_t> start_offsets) {
  if (records_.count(def.name)) throw CatalogError(CatalogError::Kind::Conflict, def.name + " already registered");
  check_inputs(def);
  auto& r = records_[def.name];
  r.name = def.name;
  r.definition = def;
  r.webhooks = webhooks;
  r.start_offsets = std::move(start_offsets);
  for (const auto& in : def.inputs) {
    records_.at(in).consumers.insert(def.name);
    persist(records_.at(in));
  }
  persist(r);
  return r;
}

const CatalogRecord& Catalog::update_event_type(const std::string& name, const EventTypeDefinition& def) {
  auto& r = find(name);
  if (r.primitive()) throw CatalogError(CatalogError::Kind::Validation, name + " is primitive");
  if (def.name != name) throw CatalogError(CatalogError::Kind::Validation, "definition renames " + name);
  check_inputs(def);
  for (const auto& in : def.inputs)
    if (reaches(in, name)) throw CatalogError(CatalogError::Kind::Validation, "update of " + name + " adds a cycle");
  for (const auto& in : r.definition->inputs) {
    records_.at(in).consumers.erase(name);
    persist(records_.at(in));
  }
  for (const auto& in : def.inputs) {
    records_.at(in).consumers.insert(name);
    persist(records_.at(in));
  }
  r.definition = def;
  ++r.version;
  persist(r);
  return r;
}

void Catalog::delete_event_type(const std::string& name) {
  auto& r = find(name);
  if (!r.consumers.empty())
    throw CatalogError(CatalogError::Kind::Dependency, name + " still has consumers");
  if (r.definition) {
    for (const auto& in : r.definition->inputs) {
      records_.at(in).consumers.erase(name);
      persist(records_.at(in));
    }
  }
  store_.remove(meta_key(name));
  records_.erase(name);
}

const CatalogRecord& Catalog::add_webhook(const std::string& name, const std::string& url) {
  auto& r = find(name);
  if (url.empty()) throw CatalogError(CatalogError::Kind::Validation, "empty webhook url");
  r.webhooks.push_back(url);
  persist(r);
  return r;
}

bool Catalog::record_assignment(const std::string& name, const std::string& worker_id, std::uint64_t epoch) {
  auto& r = find(name);
  if (epoch < r.assignment_epoch) return false;
  r.assigned_worker = worker_id;
  r.assignment_epoch = epoch;
  persist(r);
  return true;
}

control::AssignmentRequest Catalog::initial_request(const std::string& name) const {
  const auto& r = lookup_metadata(name);
  if (r.primitive()) throw CatalogError(CatalogError::Kind::Validation, name + " is primitive");
  control::AssignmentRequest req;
  req.epoch = r.assignment_epoch + 1;
  req.request_id = request_id(name, req.epoch);
  req.event_type = name;
  req.definition = to_json(*r.definition);
  req.reason = "register";
  req.notify = !r.webhooks.empty();
  req.start_offsets = r.start_offsets;
  return req;
}

std::vector<control::AssignmentRequest> Catalog::handle_worker_failure(const std::string& worker_id) const {
  std::vector<control::AssignmentRequest> out;
  if (worker_id.empty()) return out;
  for (const auto& name : topological_order()) {
    const auto& r = records_.at(name);
    if (r.assigned_worker != worker_id) continue;
    auto req = initial_request(name);
    req.reason = "failure";
    req.failed_worker = worker_id;
    out.push_back(std::move(req));
  }
  return out;
}

std::vector<std::string> Catalog::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : records_) out.push_back(n);
  return out;
}

std::vector<std::string> Catalog::topological_order() const {
  std::vector<std::string> out;
  std::set<std::string> done;
  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    if (!done.insert(n).second) return;
    const auto& r = records_.at(n);
    if (!r.definition) return;
    for (const auto& in : r.definition->inputs) visit(in);
    out.push_back(n);
  };
  for (const auto& [n, _] : records_) visit(n);
  return out;
}

}  // namespace ccep
