#pragma once

#include <memory>
#include <optional>
#include <set>

#include "mbt/consensus/election.hpp"
#include "mbt/consensus/transport.hpp"
#include "mbt/consensus/verify_cache.hpp"
#include "mbt/crypto/drbg.hpp"
#include "mbt/store/block_store.hpp"

namespace mbt::consensus {

enum class Behavior { kHonest, kSilent, kEquivocating, kInvalidProposal };

inline const char* to_string(Behavior b) {
  switch (b) {
    case Behavior::kHonest: return "honest";
    case Behavior::kSilent: return "silent";
    case Behavior::kEquivocating: return "equivocating";
    case Behavior::kInvalidProposal: return "invalid-proposal";
  }
  return "unknown";
}

/// Charged simulated costs and deadlines, relative to the round start.
struct Timing {
  SimTime block_cost{};
  unsigned cores = 1;
  SimTime proposal_timeout = from_ms(1000);
  SimTime round_timeout = from_ms(3000);
};

// Blocks are formed `cores` at a time.
inline SimTime self_cost(const Timing& t, std::size_t blocks) {
  const auto cores = std::max(1u, t.cores);
  return t.block_cost * static_cast<std::int64_t>((blocks + cores - 1) / cores);
}

enum class ProposalCheck { kOk, kWrongProposer, kBadVrf, kBadBlock };

inline const char* to_string(ProposalCheck c) {
  switch (c) {
    case ProposalCheck::kOk: return "ok";
    case ProposalCheck::kWrongProposer: return "proposer is not the elected winner";
    case ProposalCheck::kBadVrf: return "vrf proof does not verify";
    case ProposalCheck::kBadBlock: return "block does not extend the local branch tip";
  }
  return "unknown";
}

template <class Ledger>
ProposalCheck validate_proposal(const Ledger& ledger, const SubNodeTable& table,
                                const typename Ledger::block_type& block, WorkerId expected_winner,
                                const RoundRandomness& randomness, VerifyCache* cache = nullptr) {
  const auto& winner = table[expected_winner];
  if (!(block.proposer_pk == winner.pk)) return ProposalCheck::kWrongProposer;
  const auto& params = ledger.params();
  const Bytes input = randomness.encode();
  auto vrf_ok = [&] { return crypto::vrf_verify(params, winner.prepared, input, block.vrf); };
  auto digest_ok = [&] { return digest_valid(params, block); };
  if (cache) {
    const Bytes encoded = encode_block(params, block);
    const auto key = [&](std::string_view what) {
      return crypto::Sha256().update(what).update(Writer().prefixed(input).raw(encoded).bytes()).finish();
    };
    if (!cache->check(key("vrf"), vrf_ok)) return ProposalCheck::kBadVrf;
    if (!cache->check(key("digest"), digest_ok)) return ProposalCheck::kBadBlock;
  } else {
    if (!vrf_ok()) return ProposalCheck::kBadVrf;
    if (!digest_ok()) return ProposalCheck::kBadBlock;
  }
  if (ledger.check_successor(block, tree::Verify::kStructural)) return ProposalCheck::kBadBlock;
  return ProposalCheck::kOk;
}

inline VoteCheck check_vote_cached(const GroupParams& params, const SubNodeTable& table, const Vote& v,
                                   std::uint64_t round, VerifyCache* cache) {
  if (!cache) return check_vote(params, table, v, round);
  if (v.round != round) return VoteCheck::kWrongRound;
  const auto key = crypto::Sha256().update(std::string_view("vote")).update(encode(params, v)).finish();
  bool ok = cache->check(key, [&] { return check_vote(params, table, v, round) == VoteCheck::kOk; });
  return ok ? VoteCheck::kOk : check_vote(params, table, v, round);
}

/// Per-kind vote accumulator. Only a voter's first vote counts.
class VoteTally {
 public:
  bool add(WorkerId voter, const Vote& v) {
    if (!voters_.insert(voter).second) return false;
    power_[v.blockmap_digest] += v.power;
    votes_[v.blockmap_digest].push_back(v);
    return true;
  }

  std::uint64_t power(const Digest256& d) const {
    auto it = power_.find(d);
    return it == power_.end() ? 0 : it->second;
  }

  std::uint64_t max_power() const {
    std::uint64_t best = 0;
    for (const auto& [_, p] : power_) best = std::max(best, p);
    return best;
  }

  std::vector<Digest256> at_quorum(std::uint64_t quorum) const {
    std::vector<Digest256> out;
    for (const auto& [d, p] : power_) {
      if (p >= quorum) out.push_back(d);
    }
    return out;
  }

  const std::vector<Vote>& votes(const Digest256& d) const {
    static const std::vector<Vote> kNone;
    auto it = votes_.find(d);
    return it == votes_.end() ? kNone : it->second;
  }

 private:
  std::set<WorkerId> voters_;
  std::map<Digest256, std::uint64_t> power_;
  std::map<Digest256, std::vector<Vote>> votes_;
};

template <class BlockT>
void for_each_block(const tree::MedBlockTree& t, auto&& f) {
  for (const auto& [_, br] : t.branches()) {
    for (const auto& b : br.blocks) f(b);
  }
}

template <class BlockT>
void for_each_block(const tree::ShaChain& c, auto&& f) {
  for (const auto& b : c.blocks()) f(b);
}

/// One worker's protocol state machine. It owns a ledger replica and a block
/// store; every interaction with other workers goes through the transport.
template <class Ledger>
class Worker {
 public:
  using BlockT = typename Ledger::block_type;
  using Map = std::map<BranchId, BlockT>;
  using Net = Transport<BlockT>;

  struct RoundState {
    std::uint64_t round = 0;
    SimTime start{};
    std::map<BranchId, RoundRandomness> randomness;
    WinnersMap winners;
    std::map<BranchId, tree::MetadataPack> assignment;
    std::set<BranchId> resolved;
    Map blockmap;
    std::optional<SimTime> proposals_sent;
    bool prevoted = false;
    bool commit_voted = false;
    Digest256 digest{};
    VoteTally prevotes;
    VoteTally commits;
    std::optional<SimTime> committed_at;
    Digest256 committed_digest{};
    Map committed;
    std::size_t writes_before = 0;
    // Equivocation: which version each peer was shown.
    std::vector<int> shown;
    std::map<BranchId, std::array<BlockT, 2>> versions;
  };

  Worker(WorkerId id, WorkerIdentity identity, Behavior behavior, Ledger ledger,
         std::shared_ptr<const SubNodeTable> table, crypto::Drbg entropy, Timing timing)
      : id_(id),
        identity_(std::move(identity)),
        behavior_(behavior),
        ledger_(std::move(ledger)),
        table_(std::move(table)),
        entropy_(std::move(entropy)),
        adversary_(entropy_.fork("adversary")),
        timing_(timing) {
    if (!((*table_)[id_].pk == identity_.keys.pk)) {
      throw Error(ErrorKind::kConfig, "worker id does not match its table position");
    }
    for_each_block<BlockT>(ledger_, [&](const BlockT& b) { store::put_block(store_, ledger_.params(), b); });
  }

  WorkerId id() const { return id_; }
  const WorkerIdentity& identity() const { return identity_; }
  Behavior behavior() const { return behavior_; }
  bool is_correct() const { return behavior_ == Behavior::kHonest; }
  const Ledger& ledger() const { return ledger_; }
  Ledger& ledger() { return ledger_; }
  const store::BlockStore& store() const { return store_; }
  store::BlockStore& store() { return store_; }
  const RoundState& state() const { return state_; }
  const Timing& timing() const { return timing_; }
  void set_timing(const Timing& t) { timing_ = t; }
  void set_cache(std::shared_ptr<VerifyCache> cache) { cache_ = std::move(cache); }

  // Writes made since the round began.
  std::size_t round_writes() const { return store_.write_count() - state_.writes_before; }

  void begin_round(std::uint64_t round, SimTime start, const std::vector<tree::MetadataPack>& pool, Net& net) {
    state_ = RoundState{};
    state_.round = round;
    state_.start = start;
    state_.writes_before = store_.write_count();
    if (behavior_ == Behavior::kSilent) return;

    state_.randomness = randomness_map(ledger_);
    state_.winners = elect_winners(state_.randomness, *table_);
    state_.assignment = assign_pool(ledger_, pool);
    net.set_timer(start + timing_.proposal_timeout, id_, TimerKind::kProposalTimeout);

    std::vector<BranchId> mine;
    for (const auto& [branch, _] : state_.assignment) {
      if (state_.winners.at(branch) == id_) mine.push_back(branch);
    }
    if (!mine.empty()) propose(mine, start + self_cost(timing_, mine.size()), net);
    progress(start, net);
  }

  void on_delivery(const Delivery<BlockT>& d, Net& net) {
    if (behavior_ == Behavior::kSilent) return;
    if (const auto* timer = std::get_if<TimerKind>(&d.what)) {
      if (*timer == TimerKind::kProposalTimeout && !state_.prevoted) prevote(d.at, net);
      progress(d.at, net);
      return;
    }
    const auto& msg = std::get<Message<BlockT>>(d.what);
    switch (msg.kind) {
      case MessageKind::kProposal: on_proposal(msg.sender, msg.template as<Proposal<BlockT>>()); break;
      case MessageKind::kPreVote:
      case MessageKind::kCommitVote: on_vote(msg.sender, msg.template as<Vote>()); break;
      case MessageKind::kRoundSync: on_sync(d.at, msg.template as<RoundSync<BlockT>>()); break;
    }
    progress(d.at, net);
  }

 private:
  const GroupParams& params() const { return ledger_.params(); }

  void propose(const std::vector<BranchId>& branches, SimTime depart, Net& net) {
    state_.proposals_sent = depart;
    const auto round = state_.round;
    if (behavior_ == Behavior::kEquivocating) {
      state_.shown.assign(net.endpoints(), 0);
      for (WorkerId j = 0; j < net.endpoints(); ++j) {
        if (j != id_) state_.shown[j] = static_cast<int>(adversary_.uniform(2));
      }
    }
    for (auto branch : branches) {
      const auto input = state_.randomness.at(branch).encode();
      BlockT block = ledger_.make_block(branch, state_.assignment.at(branch), identity_.keys, input, entropy_, round);
      if (behavior_ == Behavior::kInvalidProposal) block.vrf.y[0] ^= 0x01;
      if (behavior_ != Behavior::kEquivocating) {
        net.broadcast(depart, id_, make_message<BlockT>(id_, Proposal<BlockT>{round, block}));
        continue;
      }
      BlockT other = ledger_.make_block(branch, state_.assignment.at(branch), identity_.keys, input, entropy_, round);
      auto& v = state_.versions[branch];
      v = {block, other};
      std::vector<typename Net::Envelope> copies;
      copies.push_back({id_, make_message<BlockT>(id_, Proposal<BlockT>{round, v[0]})});
      for (WorkerId j = 0; j < net.endpoints(); ++j) {
        if (j != id_) copies.push_back({j, make_message<BlockT>(id_, Proposal<BlockT>{round, v[state_.shown[j]]})});
      }
      net.send(depart, id_, std::move(copies));
    }
  }

  void on_proposal(WorkerId sender, const Proposal<BlockT>& p) {
    if (p.round != state_.round) return;
    const BranchId branch = p.block.index.branch;
    auto assigned = state_.assignment.find(branch);
    if (assigned == state_.assignment.end() || state_.resolved.contains(branch) || state_.prevoted) return;
    const WorkerId winner = state_.winners.at(branch);
    if (sender != winner) return;
    state_.resolved.insert(branch);
    if (!(p.block.meta == assigned->second)) return;
    if (validate_proposal(ledger_, *table_, p.block, winner, state_.randomness.at(branch), cache_.get()) ==
        ProposalCheck::kOk) {
      state_.blockmap.emplace(branch, p.block);
    }
  }

  void on_vote(WorkerId sender, const Vote& v) {
    if (v.round != state_.round) return;
    if (!((*table_)[sender].pk == v.voter_pk)) return;
    if (check_vote_cached(params(), *table_, v, state_.round, cache_.get()) != VoteCheck::kOk) return;
    (v.kind == MessageKind::kPreVote ? state_.prevotes : state_.commits).add(sender, v);
  }

  void on_sync(SimTime now, const RoundSync<BlockT>& s) {
    if (s.round != state_.round || state_.committed_at) return;
    const Digest256 digest = blockmap_digest(params(), s.blockmap);
    std::set<WorkerId> voters;
    std::uint64_t power = 0;
    for (const auto& v : s.certificate) {
      auto voter = table_->find(v.voter_pk);
      if (!voter || v.kind != MessageKind::kCommitVote || v.blockmap_digest != digest) return;
      if (!voters.insert(*voter).second) return;
      if (check_vote_cached(params(), *table_, v, state_.round, cache_.get()) != VoteCheck::kOk) return;
      power += v.power;
    }
    if (power < table_->quorum()) return;
    for (const auto& [_, block] : s.blockmap) {
      if (!cache_check_digest(block) || ledger_.check_successor(block, tree::Verify::kStructural)) return;
    }
    commit(now, digest, s.blockmap);
  }

  void progress(SimTime now, Net& net) {
    if (!state_.prevoted && state_.resolved.size() == state_.assignment.size()) prevote(now, net);
    if (!state_.prevoted) return;
    const auto quorum = table_->quorum();
    if (!state_.commit_voted && state_.prevotes.power(state_.digest) >= quorum) {
      state_.commit_voted = true;
      net.broadcast(now, id_, make_message<BlockT>(id_, sign_vote(MessageKind::kCommitVote, state_.digest)));
    }
    if (!state_.committed_at && state_.commits.power(state_.digest) >= quorum) {
      commit(now, state_.digest, state_.blockmap);
      if (is_correct()) {
        RoundSync<BlockT> sync{state_.round, state_.committed, state_.commits.votes(state_.digest)};
        net.broadcast(now, id_, make_message<BlockT>(id_, std::move(sync)), false);
      }
    }
  }

  void prevote(SimTime now, Net& net) {
    state_.prevoted = true;
    state_.digest = blockmap_digest(params(), state_.blockmap);
    if (behavior_ != Behavior::kEquivocating) {
      net.broadcast(now, id_, make_message<BlockT>(id_, sign_vote(MessageKind::kPreVote, state_.digest)));
      return;
    }
    // Each peer is told the map it was shown; with no own proposal the
    // split is between the real digest and a fabricated one.
    if (state_.shown.empty()) {
      state_.shown.assign(net.endpoints(), 0);
      for (WorkerId j = 0; j < net.endpoints(); ++j) {
        if (j != id_) state_.shown[j] = static_cast<int>(adversary_.uniform(2));
      }
    }
    std::array<Digest256, 2> digests{state_.digest, {}};
    if (state_.versions.empty()) {
      digests[1] = crypto::Sha256().update(state_.digest).update(std::string_view("fork")).finish();
    } else {
      Map alt = state_.blockmap;
      for (const auto& [branch, v] : state_.versions) alt.insert_or_assign(branch, v[1]);
      digests[1] = blockmap_digest(params(), alt);
    }
    for (auto kind : {MessageKind::kPreVote, MessageKind::kCommitVote}) {
      std::array<Message<BlockT>, 2> msgs{make_message<BlockT>(id_, sign_vote(kind, digests[0])),
                                          make_message<BlockT>(id_, sign_vote(kind, digests[1]))};
      std::vector<typename Net::Envelope> copies;
      copies.push_back({id_, msgs[0]});
      for (WorkerId j = 0; j < net.endpoints(); ++j) {
        if (j != id_) copies.push_back({j, msgs[state_.shown[j]]});
      }
      net.send(now, id_, std::move(copies));
    }
    state_.commit_voted = true;
  }

  bool cache_check_digest(const BlockT& block) {
    if (!cache_) return digest_valid(params(), block);
    const auto key = crypto::Sha256().update(std::string_view("sync-digest")).update(encode_block(params(), block)).finish();
    return cache_->check(key, [&] { return digest_valid(params(), block); });
  }

  Vote sign_vote(MessageKind kind, const Digest256& digest) const {
    return make_vote(params(), identity_, kind, state_.round, digest);
  }

  // Blocks reaching here were verified on receipt.
  void commit(SimTime now, const Digest256& digest, const Map& blockmap) {
    auto report = ledger_.append_blockmap(blockmap, tree::Verify::kStructural);
    if (!report.ok()) {
      throw Error(ErrorKind::kConflict, "validated BlockMap failed to append: " + report.errors.begin()->second);
    }
    for (const auto& [_, block] : blockmap) store::put_block(store_, params(), block);
    state_.committed_at = now;
    state_.committed_digest = digest;
    state_.committed = blockmap;
  }

  WorkerId id_;
  WorkerIdentity identity_;
  Behavior behavior_;
  Ledger ledger_;
  std::shared_ptr<const SubNodeTable> table_;
  crypto::Drbg entropy_;
  crypto::Drbg adversary_;
  Timing timing_;
  store::BlockStore store_;
  std::shared_ptr<VerifyCache> cache_;
  RoundState state_;
};

}  // namespace mbt::consensus
