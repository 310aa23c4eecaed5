#pragma once

#include <string>

#include "ccep/catalog/service.hpp"

namespace ccep {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

/// JSON routes over a CatalogService, independent of any HTTP server:
///   GET    /event_types
///   POST   /event_types                  {"definition": {...}, "webhooks": [...]}
///                                        or {"name": "...", "primitive": true}
///   GET    /event_types/{name}
///   PUT    /event_types/{name}           {"definition": {...}}
///   DELETE /event_types/{name}
///   POST   /event_types/{name}/webhooks  {"url": "..."}
/// Errors come back as {"error": kind, "message": text} with 400, 404 or 409.
class CatalogApi {
 public:
  explicit CatalogApi(CatalogService& service) : service_(service) {}
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body);

 private:
  CatalogService& service_;
};

/// Serves the API over HTTP until the process is stopped.
void serve_catalog_http(CatalogApi& api, const std::string& host, int port);

}  // namespace ccep
