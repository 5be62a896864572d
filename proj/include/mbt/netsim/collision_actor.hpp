#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>

#include "mbt/common/sim_time.hpp"
#include "mbt/tree/medblocktree.hpp"

namespace mbt::netsim {

/// Returning patients. Every `interval` a collision becomes ready
/// (`colli_cost` after the tick); the least recently returned patient whose
/// block was committed before the current round returns. Ready collisions
/// are handed over when the round's consensus ends.
class CollisionActor {
 public:
  using KeyLookup = std::function<const crypto::KeyPair&(const crypto::Element&)>;

  CollisionActor(SimTime interval, SimTime colli_cost, std::optional<std::size_t> branch_cap,
                 crypto::Element doctor_pk, KeyLookup keys, std::uint64_t first_meta_id)
      : interval_(interval),
        colli_cost_(colli_cost),
        branch_cap_(branch_cap),
        doctor_pk_(std::move(doctor_pk)),
        keys_(std::move(keys)),
        next_meta_id_(first_meta_id) {}

  bool enabled() const { return interval_.count() > 0; }

  // Called in commit order.
  void note_committed(const crypto::Element& patient, std::uint64_t round) {
    committed_round_.emplace(patient, round);
    queue_.push_back(patient);
  }

  SimTime ready_time(std::uint64_t tick) const { return interval_ * static_cast<std::int64_t>(tick) + colli_cost_; }

  std::vector<tree::CollisionBlock> claim(const tree::MedBlockTree& view, SimTime now, std::uint64_t round) {
    std::vector<tree::CollisionBlock> out;
    if (!enabled()) return out;
    std::vector<crypto::Element> returned;
    while (ready_time(next_tick_) <= now) {
      const SimTime ready = ready_time(next_tick_++);
      const bool capped = branch_cap_ && view.branch_count() + out.size() >= *branch_cap_;
      auto pick = capped ? queue_.end() : std::find_if(queue_.begin(), queue_.end(), [&](const auto& pk) {
        return committed_round_.at(pk) < round;
      });
      if (pick == queue_.end()) {
        ++skipped_;
        continue;
      }
      const auto patient = *pick;
      queue_.erase(pick);
      returned.push_back(patient);
      tree::MetadataPack meta{patient, doctor_pk_, static_cast<std::uint64_t>(ready.count() / 1000), "return-visit",
                              next_meta_id_++};
      out.push_back(view.make_collision(keys_(patient), meta));
    }
    for (auto& pk : returned) queue_.push_back(std::move(pk));
    released_ += out.size();
    return out;
  }

  std::uint64_t released() const { return released_; }
  std::uint64_t skipped() const { return skipped_; }

 private:
  SimTime interval_;
  SimTime colli_cost_;
  std::optional<std::size_t> branch_cap_;
  crypto::Element doctor_pk_;
  KeyLookup keys_;
  std::uint64_t next_meta_id_;
  std::uint64_t next_tick_ = 1;
  std::deque<crypto::Element> queue_;
  std::map<crypto::Element, std::uint64_t> committed_round_;
  std::uint64_t released_ = 0;
  std::uint64_t skipped_ = 0;
};

}  // namespace mbt::netsim
