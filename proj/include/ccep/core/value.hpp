#pragma once

#include <map>
#include <string>
#include <variant>

#include "json.hpp"

namespace ccep {

/// Scalar attribute value carried by events.
using Value = std::variant<double, std::string, bool>;

using Attributes = std::map<std::string, Value>;

inline Value number(double v) { return Value{v}; }
inline Value text(std::string v) { return Value{std::move(v)}; }
inline Value boolean(bool v) { return Value{v}; }

bool is_number(const Value& v);
bool is_text(const Value& v);
bool is_bool(const Value& v);

/// Canonical string form used for partition ids and join keys.
/// Integral numbers print without a fractional part.
std::string to_key_string(const Value& v);

nlohmann::json to_json(const Value& v);
/// Throws DecodeError for arrays, objects and null.
Value value_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Attributes& attrs);
Attributes attributes_from_json(const nlohmann::json& j);

}  // namespace ccep
