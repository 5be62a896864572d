#pragma once

#include <map>

#include "mbt/consensus/stake.hpp"
#include "mbt/crypto/sha256.hpp"
#include "mbt/tree/medblocktree.hpp"
#include "mbt/tree/sha_chain.hpp"

namespace mbt::consensus {

using tree::BranchId;

/// Public per-branch randomness: the tip's check string (or the tip hash on
/// the single chain) together with the branch id.
struct RoundRandomness {
  Bytes seed;
  BranchId branch = tree::kDefaultBranch;

  // seed | u32 branch. Input to both the election hash and the VRF.
  Bytes encode() const { return Writer().raw(seed).u32(branch).bytes(); }

  friend bool operator==(const RoundRandomness&, const RoundRandomness&) = default;
};

inline RoundRandomness randomness_of(const tree::MedBlockTree& t, BranchId branch) {
  return {t.params().encode(t.tip(branch).digest.zeta), branch};
}

inline RoundRandomness randomness_of(const tree::ShaChain& c, BranchId branch) {
  if (branch != tree::kDefaultBranch) throw Error(ErrorKind::kBranch, "baseline has a single chain");
  return {Bytes(c.tip().hash.begin(), c.tip().hash.end()), branch};
}

template <class Ledger>
std::map<BranchId, RoundRandomness> randomness_map(const Ledger& ledger) {
  std::map<BranchId, RoundRandomness> out;
  for (auto id : ledger.branch_ids()) out.emplace(id, randomness_of(ledger, id));
  return out;
}

// SHA-256(seed | u32 branch) read as a big-endian integer, reduced mod total.
inline std::uint64_t election_index(const RoundRandomness& r, std::uint64_t total) {
  if (total == 0) throw Error(ErrorKind::kParameter, "total stake must be positive");
  const Digest256 d = crypto::std_hash(r.encode());
  unsigned __int128 acc = 0;
  for (auto byte : d) acc = ((acc << 8) | byte) % total;
  return static_cast<std::uint64_t>(acc);
}

using WinnersMap = std::map<BranchId, WorkerId>;

inline WinnersMap elect_winners(const std::map<BranchId, RoundRandomness>& randomness,
                                const SubNodeTable& table) {
  if (randomness.empty()) throw Error(ErrorKind::kParameter, "no branches to elect for");
  WinnersMap winners;
  for (const auto& [id, r] : randomness) winners.emplace(id, table.owner_of(election_index(r, table.total())));
  return winners;
}

template <class Ledger>
WinnersMap elect_winners(const Ledger& ledger, const SubNodeTable& table) {
  return elect_winners(randomness_map(ledger), table);
}

// FIFO pool entries go to branch ids in ascending order; surplus branches idle.
template <class Ledger>
std::map<BranchId, tree::MetadataPack> assign_pool(const Ledger& ledger,
                                                   const std::vector<tree::MetadataPack>& pool) {
  std::map<BranchId, tree::MetadataPack> out;
  auto ids = ledger.branch_ids();
  for (std::size_t i = 0; i < ids.size() && i < pool.size(); ++i) out.emplace(ids[i], pool[i]);
  return out;
}

}  // namespace mbt::consensus
