#pragma once

#include <cstdint>
#include <queue>
#include <vector>

#include "mbt/common/sim_time.hpp"

namespace mbt::netsim {

enum class EventKind : std::uint8_t { kMessage = 0, kCollisionRelease = 1, kMetadataArrival = 2, kRoundTimer = 3 };

/// Min-queue ordered by (at, kind, sender, insertion sequence).
template <class Payload>
class EventQueue {
 public:
  struct Event {
    SimTime at{};
    EventKind kind = EventKind::kMessage;
    std::size_t sender = 0;
    std::uint64_t seq = 0;
    Payload payload;
  };

  void push(SimTime at, EventKind kind, std::size_t sender, Payload payload) {
    heap_.push(Event{at, kind, sender, next_seq_++, std::move(payload)});
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  const Event& top() const { return heap_.top(); }

  Event pop() {
    Event e = heap_.top();
    heap_.pop();
    return e;
  }

  void clear() { heap_ = {}; }

 private:
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      if (a.at != b.at) return a.at > b.at;
      if (a.kind != b.kind) return a.kind > b.kind;
      if (a.sender != b.sender) return a.sender > b.sender;
      return a.seq > b.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace mbt::netsim
