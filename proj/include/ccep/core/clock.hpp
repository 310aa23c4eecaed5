#pragma once

#include <cstdint>
#include <functional>

namespace ccep {

/// Microseconds on whatever timeline the caller drives: virtual in the
/// simulated cluster, steady wall time elsewhere.
using TimeUs = std::int64_t;
using Clock = std::function<TimeUs()>;

Clock steady_clock_us();

inline TimeUs ms_to_us(std::int64_t ms) { return ms * 1000; }
inline std::int64_t us_to_ms(TimeUs us) { return us / 1000; }

}  // namespace ccep
