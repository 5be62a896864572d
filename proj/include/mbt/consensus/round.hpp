#pragma once

#include <functional>

#include "mbt/consensus/worker.hpp"

namespace mbt::consensus {

template <class Ledger>
struct Cluster {
  std::shared_ptr<const SubNodeTable> table;
  std::vector<Worker<Ledger>> workers;
  Timing timing;
  SimTime db_write{};
  std::shared_ptr<VerifyCache> cache;

  void set_timing(const Timing& t) {
    timing = t;
    for (auto& w : workers) w.set_timing(t);
  }

  // First honest worker; its replica is the harness's view of the ledger.
  const Worker<Ledger>& reference() const {
    for (const auto& w : workers) {
      if (w.is_correct()) return w;
    }
    throw Error(ErrorKind::kConfig, "cluster has no honest worker");
  }
};

/// Builds workers in table order. `behaviors[i]` applies to `identities[i]`.
template <class Ledger>
Cluster<Ledger> make_cluster(const Ledger& genesis, const std::vector<WorkerIdentity>& identities,
                             const std::vector<Behavior>& behaviors, Timing timing, SimTime db_write,
                             const crypto::Drbg& entropy) {
  if (behaviors.size() != identities.size()) throw Error(ErrorKind::kConfig, "one behavior per worker");
  Cluster<Ledger> c;
  c.table = std::make_shared<const SubNodeTable>(SubNodeTable::from_identities(genesis.params(), identities));
  c.timing = timing;
  c.db_write = db_write;
  std::vector<std::size_t> by_rank(identities.size());
  for (std::size_t i = 0; i < identities.size(); ++i) by_rank[*c.table->find(identities[i].keys.pk)] = i;
  for (WorkerId id = 0; id < by_rank.size(); ++id) {
    const auto i = by_rank[id];
    c.workers.emplace_back(id, identities[i], behaviors[i], genesis, c.table, entropy.fork("worker", id), timing);
  }
  c.cache = std::make_shared<VerifyCache>();
  for (auto& w : c.workers) w.set_cache(c.cache);
  return c;
}

struct PhaseTimes {
  SimTime start{};
  SimTime proposed{};   // last proposal leaves its winner
  SimTime consensus{};  // last honest commit, or the deadline
  SimTime end{};        // database writes done

  SimTime self() const { return proposed - start; }
  SimTime net() const { return consensus - proposed; }
  SimTime db() const { return end - consensus; }
  SimTime total() const { return end - start; }
};

template <class BlockT>
struct RoundOutcome {
  std::uint64_t round = 0;
  std::map<BranchId, BlockT> blockmap;
  bool committed = false;
  std::uint64_t vote_power_prevote = 0;
  std::uint64_t vote_power_commit = 0;
  Digest256 digest{};
  WinnersMap winners;
  PhaseTimes times;
  std::size_t writes = 0;
  std::vector<BranchId> sprouted;
  // Honest workers committed different digests. Must never happen.
  bool conflicting = false;

  std::size_t blocks() const { return blockmap.size() + sprouted.size(); }
};

using CollisionSource = std::function<std::vector<tree::CollisionBlock>(SimTime)>;

/// Runs one round from `start`: proposals, pre-votes and commit votes over
/// the transport, then the tree update. `claims`, when given, is asked at
/// the end of consensus for the collision blocks to sprout this round; they
/// are claimed whether or not the BlockMap committed.
template <class Ledger>
RoundOutcome<typename Ledger::block_type> run_round(Cluster<Ledger>& cluster, std::uint64_t round, SimTime start,
                                                    const std::vector<tree::MetadataPack>& pool,
                                                    Transport<typename Ledger::block_type>& net,
                                                    const CollisionSource& claims = {}) {
  using BlockT = typename Ledger::block_type;
  RoundOutcome<BlockT> out;
  out.round = round;
  out.times.start = start;

  if (cluster.cache) cluster.cache->clear();
  for (auto& w : cluster.workers) w.begin_round(round, start, pool, net);
  const SimTime deadline = start + cluster.timing.round_timeout;
  while (auto d = net.next()) {
    if (d->at > deadline) break;
    cluster.workers.at(d->to).on_delivery(*d, net);
  }
  net.clear();

  const auto& ref = cluster.reference();
  out.winners = ref.state().winners;
  out.times.proposed = start;
  for (const auto& w : cluster.workers) {
    if (w.state().proposals_sent) out.times.proposed = std::max(out.times.proposed, *w.state().proposals_sent);
  }

  const Worker<Ledger>* first = nullptr;
  SimTime last_commit{};
  for (const auto& w : cluster.workers) {
    if (!w.is_correct()) continue;
    const auto& st = w.state();
    out.vote_power_prevote = std::max(out.vote_power_prevote, st.prevotes.max_power());
    out.vote_power_commit = std::max(out.vote_power_commit, st.commits.max_power());
    if (!st.committed_at) continue;
    last_commit = std::max(last_commit, *st.committed_at);
    if (!first) {
      first = &w;
    } else if (st.committed_digest != first->state().committed_digest) {
      out.conflicting = true;
    }
  }
  if (first) {
    const auto& st = first->state();
    out.committed = true;
    out.blockmap = st.committed;
    out.digest = st.committed_digest;
    out.vote_power_prevote = st.prevotes.power(st.committed_digest);
    out.vote_power_commit = st.commits.power(st.committed_digest);
    out.times.consensus = last_commit;
  } else {
    out.times.consensus = deadline;
  }
  out.times.proposed = std::min(out.times.proposed, out.times.consensus);

  if constexpr (std::is_same_v<Ledger, tree::MedBlockTree>) {
    if (claims) {
      for (const auto& c : claims(out.times.consensus)) {
        if (auto reason = ref.ledger().validate_collision(c)) throw tree::CollisionRejected(*reason);
        for (auto& w : cluster.workers) {
          if (w.behavior() == Behavior::kSilent || w.ledger().validate_collision(c)) continue;
          const BranchId id = w.ledger().sprout_branch(c, round);
          store::put_block(w.store(), w.ledger().params(), w.ledger().tip(id));
          if (&w == &ref) out.sprouted.push_back(id);
        }
      }
    }
  }

  for (const auto& w : cluster.workers) {
    if (w.is_correct()) out.writes = std::max(out.writes, w.round_writes());
  }
  out.times.end = out.times.consensus + cluster.db_write * static_cast<std::int64_t>(out.writes);
  return out;
}

inline RoundOutcome<tree::LinkedBlock> run_baseline_round(Cluster<tree::ShaChain>& cluster, std::uint64_t round,
                                                          SimTime start, const std::vector<tree::MetadataPack>& pool,
                                                          Transport<tree::LinkedBlock>& net) {
  return run_round(cluster, round, start, pool, net);
}

}  // namespace mbt::consensus
