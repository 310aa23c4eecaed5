#include "ccep/control/messages.hpp"

#include "ccep/core/error.hpp"

namespace ccep::control {

std::string to_string(Lifecycle l) { return nlohmann::json(l).get<std::string>(); }
std::string to_string(Phase p) { return nlohmann::json(p).get<std::string>(); }

Envelope decode(const std::string& payload) {
  auto j = nlohmann::json::parse(payload, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DecodeError("control message is not a JSON object");
  auto k = j.find("kind");
  if (k == j.end() || !k->is_string()) throw DecodeError("control message without kind");
  return {k->get<std::string>(), std::move(j)};
}

}  // namespace ccep::control
