#pragma once

#include <stdexcept>
#include <string>

namespace ccep {

/// Raised when an event-type definition is malformed or violates an invariant.
class DefinitionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-event failure: the event is dropped for the affected type and the
/// engine keeps going.
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed wire or storage bytes.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ccep
