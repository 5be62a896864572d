#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "mbt/crypto/keys.hpp"

namespace mbt::consensus {

using crypto::Element;
using crypto::GroupParams;
using crypto::KeyPair;
using WorkerId = std::size_t;

struct WorkerIdentity {
  KeyPair keys;
  std::uint64_t tokens = 1;
};

/// Workers in canonical order (ascending public-key encoding). Worker i owns
/// the sub-node indexes [begin, begin + tokens). A worker's position in this
/// table is its WorkerId everywhere else.
class SubNodeTable {
 public:
  struct Entry {
    Element pk;
    crypto::PublicKey prepared;
    std::uint64_t begin = 0;
    std::uint64_t tokens = 0;
  };

  SubNodeTable(const GroupParams& params, std::vector<std::pair<Element, std::uint64_t>> stakes) {
    if (stakes.empty()) throw Error(ErrorKind::kConfig, "sub-node table needs at least one worker");
    std::vector<std::pair<Bytes, std::size_t>> order;
    for (std::size_t i = 0; i < stakes.size(); ++i) {
      if (stakes[i].second == 0) throw Error(ErrorKind::kConfig, "every worker must deposit at least one token");
      order.emplace_back(params.encode(stakes[i].first), i);
    }
    std::sort(order.begin(), order.end());
    for (std::size_t i = 1; i < order.size(); ++i) {
      if (order[i].first == order[i - 1].first) throw Error(ErrorKind::kConfig, "duplicate worker key");
    }
    for (const auto& [_, i] : order) {
      const auto& [pk, tokens] = stakes[i];
      entries_.push_back({pk, crypto::PublicKey(params, pk), total_, tokens});
      total_ += tokens;
    }
  }

  static SubNodeTable from_identities(const GroupParams& params, const std::vector<WorkerIdentity>& ids) {
    std::vector<std::pair<Element, std::uint64_t>> stakes;
    for (const auto& id : ids) stakes.emplace_back(id.keys.pk, id.tokens);
    return SubNodeTable(params, std::move(stakes));
  }

  std::size_t size() const { return entries_.size(); }
  const Entry& operator[](WorkerId id) const { return entries_.at(id); }
  const std::vector<Entry>& entries() const { return entries_; }
  std::uint64_t total() const { return total_; }

  // ceil(2 * total / 3), compared with >=.
  std::uint64_t quorum() const { return (2 * total_ + 2) / 3; }

  WorkerId owner_of(std::uint64_t sub_node) const {
    if (sub_node >= total_) throw Error(ErrorKind::kParameter, "sub-node index out of range");
    auto it = std::upper_bound(entries_.begin(), entries_.end(), sub_node,
                               [](std::uint64_t v, const Entry& e) { return v < e.begin; });
    return static_cast<WorkerId>(std::distance(entries_.begin(), it) - 1);
  }

  std::optional<WorkerId> find(const Element& pk) const {
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      if (entries_[i].pk == pk) return i;
    }
    return std::nullopt;
  }

 private:
  std::vector<Entry> entries_;
  std::uint64_t total_ = 0;
};

}  // namespace mbt::consensus
