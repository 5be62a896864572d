#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "mbt/common/sim_time.hpp"
#include "mbt/consensus/messages.hpp"

namespace mbt::consensus {

enum class TimerKind : std::uint8_t { kProposalTimeout = 1 };

template <class BlockT>
struct Delivery {
  SimTime at{};
  WorkerId to = 0;
  std::variant<Message<BlockT>, TimerKind> what;
};

/// The only channel between workers. Implementations decide delivery times
/// and must hand out deliveries in a stable total order.
template <class BlockT>
class Transport {
 public:
  struct Envelope {
    WorkerId to;
    Message<BlockT> msg;
  };

  virtual ~Transport() = default;

  virtual std::size_t endpoints() const = 0;
  // Copies leave the sender in the given order.
  virtual void send(SimTime depart, WorkerId from, std::vector<Envelope> copies) = 0;
  virtual void set_timer(SimTime at, WorkerId who, TimerKind kind) = 0;
  virtual std::optional<Delivery<BlockT>> next() = 0;
  // Drops everything still queued.
  virtual void clear() = 0;

  // Own copy first, then peers in id order.
  void broadcast(SimTime depart, WorkerId from, const Message<BlockT>& msg, bool include_self = true) {
    std::vector<Envelope> copies;
    if (include_self) copies.push_back({from, msg});
    for (WorkerId to = 0; to < endpoints(); ++to) {
      if (to != from) copies.push_back({to, msg});
    }
    send(depart, from, std::move(copies));
  }
};

}  // namespace mbt::consensus
