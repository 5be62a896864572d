#pragma once

#include "mbt/common/error.hpp"
#include "mbt/common/sim_time.hpp"
#include "mbt/crypto/drbg.hpp"

namespace mbt::netsim {

/// Link delay: base plus optional uniform jitter in [0, jitter_ms]. Copies of
/// one send leave the sender per_message_ms apart.
struct LatencyModel {
  double base_ms = 100.0;
  double jitter_ms = 0.0;
  double per_message_ms = 1.0;

  void validate() const {
    if (base_ms < 0 || jitter_ms < 0 || per_message_ms < 0) {
      throw Error(ErrorKind::kConfig, "latency parameters must be non-negative");
    }
  }

  // Worst case for one hop carrying `copies` messages.
  SimTime hop_bound(std::size_t copies) const {
    return from_ms(base_ms + jitter_ms + per_message_ms * static_cast<double>(copies));
  }
};

// Arrival of the copy that is `position`-th in its sender's queue.
inline SimTime delivery_time(SimTime depart, std::size_t position, const LatencyModel& m, crypto::Drbg& rng) {
  SimTime at = depart + from_ms(m.per_message_ms * static_cast<double>(position)) + from_ms(m.base_ms);
  if (m.jitter_ms > 0) {
    const auto span = static_cast<std::uint64_t>(from_ms(m.jitter_ms).count());
    at += SimTime(static_cast<std::int64_t>(rng.uniform(span + 1)));
  }
  return at;
}

}  // namespace mbt::netsim
