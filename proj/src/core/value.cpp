#include "ccep/core/value.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>

#include "ccep/core/error.hpp"

namespace ccep {

bool is_number(const Value& v) { return std::holds_alternative<double>(v); }
bool is_text(const Value& v) { return std::holds_alternative<std::string>(v); }
bool is_bool(const Value& v) { return std::holds_alternative<bool>(v); }

std::string to_key_string(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) {
    if (std::isfinite(*d) && std::floor(*d) == *d && std::fabs(*d) < 9.0e15) {
      return std::to_string(static_cast<std::int64_t>(*d));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    return buf;
  }
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  return std::get<bool>(v) ? "true" : "false";
}

nlohmann::json to_json(const Value& v) {
  return std::visit([](const auto& x) { return nlohmann::json(x); }, v);
}

Value value_from_json(const nlohmann::json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw DecodeError("attribute value must be a number, string or boolean");
}

nlohmann::json to_json(const Attributes& attrs) {
  auto j = nlohmann::json::object();
  for (const auto& [k, v] : attrs) j[k] = to_json(v);
  return j;
}

Attributes attributes_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DecodeError("attributes must be an object");
  Attributes out;
  for (const auto& [k, v] : j.items()) {
    if (k.empty()) throw DecodeError("attribute names must be non-empty");
    out.emplace(k, value_from_json(v));
  }
  return out;
}

}  // namespace ccep
