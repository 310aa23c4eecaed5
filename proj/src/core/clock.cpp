#include "ccep/core/clock.hpp"

#include <chrono>

namespace ccep {

Clock steady_clock_us() {
  auto origin = std::chrono::steady_clock::now();
  return [origin] {
    return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() - origin)
        .count();
  };
}

}  // namespace ccep
