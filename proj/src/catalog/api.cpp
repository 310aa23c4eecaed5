#include "ccep/catalog/api.hpp"

#include <regex>

#include "ccep/core/error.hpp"
#include "httplib.h"

namespace ccep {

namespace {

ApiResponse error(int status, const std::string& kind, const std::string& message) {
  return {status, {{"error", kind}, {"message", message}}};
}

ApiResponse from_catalog_error(const CatalogError& ex) {
  switch (ex.kind()) {
    case CatalogError::Kind::Conflict:
      return error(409, "conflict", ex.what());
    case CatalogError::Kind::NotFound:
      return error(404, "not_found", ex.what());
    case CatalogError::Kind::Dependency:
      return error(409, "dependency", ex.what());
    case CatalogError::Kind::Validation:
      break;
  }
  return error(400, "validation", ex.what());
}

}  // namespace

ApiResponse CatalogApi::handle(const std::string& method, const std::string& path, const std::string& body) {
  static const std::regex item(R"(^/event_types/([^/]+)$)");
  static const std::regex hooks(R"(^/event_types/([^/]+)/webhooks$)");
  try {
    nlohmann::json in;
    if (!body.empty()) {
      in = nlohmann::json::parse(body, nullptr, false);
      if (in.is_discarded() || !in.is_object()) return error(400, "validation", "body is not a JSON object");
    }
    std::smatch m;
    if (path == "/event_types") {
      if (method == "GET") {
        auto arr = nlohmann::json::array();
        for (const auto& r : service_.list()) arr.push_back(to_json(r));
        return {200, arr};
      }
      if (method == "POST") {
        if (in.value("primitive", false)) {
          return {201, to_json(service_.declare_primitive(in.at("name").get<std::string>()))};
        }
        if (!in.contains("definition")) return error(400, "validation", "missing definition");
        auto def = definition_from_json(in.at("definition"));
        auto webhooks = in.value("webhooks", std::vector<std::string>{});
        return {201, to_json(service_.register_event_type(def, webhooks))};
      }
      return error(405, "method_not_allowed", method + " " + path);
    }
    if (std::regex_match(path, m, hooks)) {
      if (method != "POST") return error(405, "method_not_allowed", method + " " + path);
      return {201, to_json(service_.add_webhook(m[1].str(), in.at("url").get<std::string>()))};
    }
    if (std::regex_match(path, m, item)) {
      auto name = m[1].str();
      if (method == "GET") return {200, to_json(service_.lookup(name))};
      if (method == "PUT") {
        if (!in.contains("definition")) return error(400, "validation", "missing definition");
        return {200, to_json(service_.update_event_type(name, definition_from_json(in.at("definition"))))};
      }
      if (method == "DELETE") {
        service_.delete_event_type(name);
        return {200, {{"deleted", name}}};
      }
      return error(405, "method_not_allowed", method + " " + path);
    }
    return error(404, "not_found", "no route " + path);
  } catch (const CatalogError& ex) {
    return from_catalog_error(ex);
  } catch (const DefinitionError& ex) {
    return error(400, "validation", ex.what());
  } catch (const nlohmann::json::exception& ex) {
    return error(400, "validation", ex.what());
  }
}

void serve_catalog_http(CatalogApi& api, const std::string& host, int port) {
  httplib::Server server;
  auto route = [&api](const httplib::Request& req, httplib::Response& res) {
    auto out = api.handle(req.method, req.path, req.body);
    res.status = out.status;
    res.set_content(out.body.dump(), "application/json");
  };
  server.Get(R"(/event_types.*)", route);
  server.Post(R"(/event_types.*)", route);
  server.Put(R"(/event_types.*)", route);
  server.Delete(R"(/event_types.*)", route);
  if (!server.listen(host, port)) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace ccep
