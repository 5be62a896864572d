#pragma once

#include "mbt/consensus/transport.hpp"
#include "mbt/netsim/event_queue.hpp"
#include "mbt/netsim/latency.hpp"

namespace mbt::netsim {

using consensus::Delivery;
using consensus::WorkerId;

/// Discrete-event transport. A worker's copy to itself arrives at the send
/// instant; copies to peers follow the latency model.
template <class BlockT>
class SimNetwork final : public consensus::Transport<BlockT> {
 public:
  using Envelope = typename consensus::Transport<BlockT>::Envelope;

  SimNetwork(std::size_t endpoints, LatencyModel model, crypto::Drbg rng)
      : endpoints_(endpoints), model_(model), rng_(std::move(rng)) {
    model_.validate();
  }

  std::size_t endpoints() const override { return endpoints_; }

  void send(SimTime depart, WorkerId from, std::vector<Envelope> copies) override {
    std::size_t position = 0;
    for (auto& c : copies) {
      if (c.to >= endpoints_) throw Error(ErrorKind::kParameter, "unknown recipient");
      const SimTime at = c.to == from ? depart : delivery_time(depart, position++, model_, rng_);
      queue_.push(at, EventKind::kMessage, from, Delivery<BlockT>{at, c.to, std::move(c.msg)});
      ++messages_;
    }
  }

  void set_timer(SimTime at, WorkerId who, consensus::TimerKind kind) override {
    queue_.push(at, EventKind::kRoundTimer, who, Delivery<BlockT>{at, who, kind});
  }

  std::optional<Delivery<BlockT>> next() override {
    if (queue_.empty()) return std::nullopt;
    return queue_.pop().payload;
  }

  void clear() override { queue_.clear(); }

  const LatencyModel& model() const { return model_; }
  std::uint64_t messages_sent() const { return messages_; }

 private:
  std::size_t endpoints_;
  LatencyModel model_;
  crypto::Drbg rng_;
  EventQueue<Delivery<BlockT>> queue_;
  std::uint64_t messages_ = 0;
};

}  // namespace mbt::netsim
