#pragma once

#include <functional>
#include <optional>
#include <string>

#include "ccep/core/clock.hpp"
#include "ccep/core/event.hpp"

namespace ccep {

/// What a node needs from its host: time, timers and, for workers, the
/// ability to start and retire instances.
class Runtime {
 public:
  virtual ~Runtime() = default;
  virtual TimeUs now() const = 0;
  /// Runs fn at `at` unless `owner` has crashed or retired by then.
  virtual void schedule(TimeUs at, const std::string& owner, std::function<void()> fn) = 0;
  /// Starts a fresh worker and returns its id, or nullopt at the instance ceiling.
  virtual std::optional<std::string> spawn_worker() = 0;
  /// Called by a worker once it has terminated.
  virtual void retire_worker(const std::string& id) = 0;

  /// Observers for metrics; no-ops by default.
  virtual void on_detection(const std::string& /*worker*/, const Event& /*e*/, TimeUs /*published_at*/) {}
  virtual void on_relocation_completed(const std::string& /*type*/, const std::string& /*from*/,
                                       const std::string& /*to*/) {}
  virtual void on_deferral(const std::string& /*worker*/) {}
};

}  // namespace ccep
