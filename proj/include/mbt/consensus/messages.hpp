#pragma once

#include <memory>
#include <variant>

#include "mbt/consensus/stake.hpp"
#include "mbt/crypto/schnorr.hpp"
#include "mbt/crypto/sha256.hpp"
#include "mbt/tree/block.hpp"
#include "mbt/tree/sha_chain.hpp"

namespace mbt::consensus {

enum class MessageKind : std::uint8_t { kProposal = 1, kPreVote = 2, kCommitVote = 3, kRoundSync = 4 };

inline const char* to_string(MessageKind k) {
  switch (k) {
    case MessageKind::kProposal: return "Proposal";
    case MessageKind::kPreVote: return "PreVote";
    case MessageKind::kCommitVote: return "CommitVote";
    case MessageKind::kRoundSync: return "RoundSync";
  }
  return "unknown";
}

inline Bytes encode_block(const GroupParams& params, const tree::Block& b) { return tree::encode(params, b); }
inline Bytes encode_block(const GroupParams& params, const tree::LinkedBlock& b) { return tree::encode(params, b); }

template <class BlockT>
BlockT decode_block_as(const GroupParams& params, ByteView data) {
  if constexpr (std::is_same_v<BlockT, tree::Block>) {
    return tree::decode_block(params, data);
  } else {
    return tree::decode_linked_block(params, data);
  }
}

inline constexpr std::string_view kBlockMapDomain = "MBT/blockmap/v1";

// SHA-256(domain | u32 count | per branch ascending: u32 id | u32 len | block)
template <class BlockT>
Digest256 blockmap_digest(const GroupParams& params, const std::map<tree::BranchId, BlockT>& blockmap) {
  Writer w;
  w.u32(static_cast<std::uint32_t>(blockmap.size()));
  for (const auto& [id, block] : blockmap) w.u32(id).prefixed(encode_block(params, block));
  return crypto::Sha256().update(kBlockMapDomain).update(w.bytes()).finish();
}

template <class BlockT>
struct Proposal {
  std::uint64_t round = 0;
  BlockT block;

  friend bool operator==(const Proposal&, const Proposal&) = default;
};

// u8 kind | u64 round | u32 len | block
template <class BlockT>
Bytes encode(const GroupParams& params, const Proposal<BlockT>& p) {
  return Writer()
      .u8(static_cast<std::uint8_t>(MessageKind::kProposal))
      .u64(p.round)
      .prefixed(encode_block(params, p.block))
      .bytes();
}

template <class BlockT>
Proposal<BlockT> decode_proposal(const GroupParams& params, ByteView data) {
  Reader r(data);
  if (r.u8() != static_cast<std::uint8_t>(MessageKind::kProposal)) throw Error(ErrorKind::kFormat, "not a proposal");
  Proposal<BlockT> p;
  p.round = r.u64();
  p.block = decode_block_as<BlockT>(params, r.prefixed());
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after proposal");
  return p;
}

struct Vote {
  MessageKind kind = MessageKind::kPreVote;  // kPreVote or kCommitVote
  Element voter_pk;
  std::uint64_t round = 0;
  Digest256 blockmap_digest{};
  std::uint64_t power = 0;
  crypto::Signature signature;

  friend bool operator==(const Vote&, const Vote&) = default;
};

inline constexpr std::string_view kVoteDomain = "MBT/vote/v1";

// u8 kind | voter_pk | u64 round | digest | u64 power. The signed part.
inline Bytes vote_body(const GroupParams& params, const Vote& v) {
  return Writer()
      .u8(static_cast<std::uint8_t>(v.kind))
      .raw(params.encode(v.voter_pk))
      .u64(v.round)
      .raw(v.blockmap_digest)
      .u64(v.power)
      .bytes();
}

// body | c | s
inline Bytes encode(const GroupParams& params, const Vote& v) {
  return Writer().raw(vote_body(params, v)).raw(crypto::encode(params, v.signature)).bytes();
}

inline Vote decode_vote(const GroupParams& params, ByteView data) {
  Reader r(data);
  Vote v;
  auto kind = r.u8();
  if (kind != static_cast<std::uint8_t>(MessageKind::kPreVote) &&
      kind != static_cast<std::uint8_t>(MessageKind::kCommitVote)) {
    throw Error(ErrorKind::kFormat, "not a vote");
  }
  v.kind = static_cast<MessageKind>(kind);
  v.voter_pk = params.decode_element(r.raw(params.element_bytes()));
  v.round = r.u64();
  auto d = r.raw(32);
  std::copy(d.begin(), d.end(), v.blockmap_digest.begin());
  v.power = r.u64();
  v.signature = crypto::decode_signature(params, r.raw(2 * params.scalar_bytes()));
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after vote");
  return v;
}

inline Vote make_vote(const GroupParams& params, const WorkerIdentity& voter, MessageKind kind,
                      std::uint64_t round, const Digest256& digest) {
  Vote v{kind, voter.keys.pk, round, digest, voter.tokens, {}};
  v.signature = crypto::sign(params, voter.keys, kVoteDomain, vote_body(params, v));
  return v;
}

enum class VoteCheck { kOk, kUnknownVoter, kWrongPower, kWrongRound, kBadSignature };

inline VoteCheck check_vote(const GroupParams& params, const SubNodeTable& table, const Vote& v,
                            std::uint64_t round) {
  auto id = table.find(v.voter_pk);
  if (!id) return VoteCheck::kUnknownVoter;
  if (v.power != table[*id].tokens) return VoteCheck::kWrongPower;
  if (v.round != round) return VoteCheck::kWrongRound;
  if (!crypto::verify_signature(params, table[*id].prepared, kVoteDomain, vote_body(params, v), v.signature)) {
    return VoteCheck::kBadSignature;
  }
  return VoteCheck::kOk;
}

/// Commit certificate plus the committed BlockMap, sent to peers that may
/// have missed the commit votes.
template <class BlockT>
struct RoundSync {
  std::uint64_t round = 0;
  std::map<tree::BranchId, BlockT> blockmap;
  std::vector<Vote> certificate;

  friend bool operator==(const RoundSync&, const RoundSync&) = default;
};

// u8 kind | u64 round | u32 n | n x (u32 id | u32 len | block) | u32 m | m x (u32 len | vote)
template <class BlockT>
Bytes encode(const GroupParams& params, const RoundSync<BlockT>& s) {
  Writer w;
  w.u8(static_cast<std::uint8_t>(MessageKind::kRoundSync)).u64(s.round);
  w.u32(static_cast<std::uint32_t>(s.blockmap.size()));
  for (const auto& [id, block] : s.blockmap) w.u32(id).prefixed(encode_block(params, block));
  w.u32(static_cast<std::uint32_t>(s.certificate.size()));
  for (const auto& v : s.certificate) w.prefixed(encode(params, v));
  return w.bytes();
}

template <class BlockT>
RoundSync<BlockT> decode_round_sync(const GroupParams& params, ByteView data) {
  Reader r(data);
  if (r.u8() != static_cast<std::uint8_t>(MessageKind::kRoundSync)) throw Error(ErrorKind::kFormat, "not a round sync");
  RoundSync<BlockT> s;
  s.round = r.u64();
  for (auto n = r.u32(); n > 0; --n) {
    auto id = r.u32();
    s.blockmap.emplace(id, decode_block_as<BlockT>(params, r.prefixed()));
  }
  for (auto m = r.u32(); m > 0; --m) s.certificate.push_back(decode_vote(params, r.prefixed()));
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after round sync");
  return s;
}

template <class BlockT>
using Payload = std::variant<Proposal<BlockT>, Vote, RoundSync<BlockT>>;

template <class BlockT>
struct Message {
  MessageKind kind = MessageKind::kProposal;
  WorkerId sender = 0;
  std::shared_ptr<const Payload<BlockT>> payload;

  template <class T>
  const T& as() const {
    return std::get<T>(*payload);
  }
};

template <class BlockT>
Message<BlockT> make_message(WorkerId sender, Proposal<BlockT> p) {
  return {MessageKind::kProposal, sender, std::make_shared<const Payload<BlockT>>(std::move(p))};
}

template <class BlockT>
Message<BlockT> make_message(WorkerId sender, Vote v) {
  auto kind = v.kind;
  return {kind, sender, std::make_shared<const Payload<BlockT>>(std::move(v))};
}

template <class BlockT>
Message<BlockT> make_message(WorkerId sender, RoundSync<BlockT> s) {
  return {MessageKind::kRoundSync, sender, std::make_shared<const Payload<BlockT>>(std::move(s))};
}

template <class BlockT>
Bytes encode(const GroupParams& params, const Message<BlockT>& m) {
  return std::visit([&](const auto& p) { return encode(params, p); }, *m.payload);
}

}  // namespace mbt::consensus
