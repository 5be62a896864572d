#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>

namespace mbt {

// Simulated clock. Integer microseconds keep every duration sum exact.
using SimTime = std::chrono::duration<std::int64_t, std::micro>;

inline SimTime from_ms(double ms) { return SimTime(std::llround(ms * 1000.0)); }

inline double to_ms(SimTime t) { return static_cast<double>(t.count()) / 1000.0; }

inline double to_seconds(SimTime t) { return static_cast<double>(t.count()) / 1e6; }

}  // namespace mbt
