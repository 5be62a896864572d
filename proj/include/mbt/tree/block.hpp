#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mbt/crypto/chameleon.hpp"
#include "mbt/crypto/vrf.hpp"
#include "mbt/tree/metadata.hpp"

namespace mbt::tree {

using BranchId = std::uint32_t;
inline constexpr BranchId kDefaultBranch = 1;

struct BlockIndex {
  BranchId branch = kDefaultBranch;
  std::uint32_t seq = 0;

  friend auto operator<=>(const BlockIndex&, const BlockIndex&) = default;
};

inline std::string to_string(const BlockIndex& i) {
  return "B" + std::to_string(i.branch) + "." + std::to_string(i.seq);
}

struct Block {
  BlockIndex index;
  Element pre_hash;  // predecessor's chameleon hash value
  crypto::ChameleonDigest digest;
  MetadataPack meta;
  Element proposer_pk;
  crypto::VrfOutput vrf;
  std::uint64_t committed_round = 0;

  friend bool operator==(const Block&, const Block&) = default;
};

/// A block carrying new metadata for a returning patient whose hash value and
/// pre-hash equal those of the patient's block at origin_index.
struct CollisionBlock {
  Block block;
  BlockIndex origin_index;

  friend bool operator==(const CollisionBlock&, const CollisionBlock&) = default;
};

using BlockMap = std::map<BranchId, Block>;

// kStructural skips the signature-style digest check for callers that have
// already done it.
enum class Verify { kFull, kStructural };

inline bool digest_valid(const crypto::GroupParams& params, const Block& b) {
  return crypto::verify(params, b.meta.patient_pk, encode(params, b.meta), b.digest);
}

// Outcome of extending branches: each branch succeeds or fails on its own.
struct AppendReport {
  std::vector<BranchId> appended;
  std::map<BranchId, std::string> errors;

  bool ok() const { return errors.empty(); }
};

// u32 branch | u32 seq | pre_hash | h | zeta | u32 len | metadata
// | proposer_pk | vrf (y | c | s) | u64 committed_round
inline Bytes encode(const crypto::GroupParams& params, const Block& b) {
  return Writer()
      .u32(b.index.branch)
      .u32(b.index.seq)
      .raw(params.encode(b.pre_hash))
      .raw(params.encode(b.digest.h))
      .raw(params.encode(b.digest.zeta))
      .prefixed(encode(params, b.meta))
      .raw(params.encode(b.proposer_pk))
      .raw(crypto::encode(params, b.vrf))
      .u64(b.committed_round)
      .bytes();
}

inline Block decode_block(const crypto::GroupParams& params, ByteView data) {
  Reader r(data);
  Block b;
  b.index.branch = r.u32();
  b.index.seq = r.u32();
  b.pre_hash = params.decode_element(r.raw(params.element_bytes()));
  b.digest.h = params.decode_element(r.raw(params.element_bytes()));
  b.digest.zeta = params.decode_scalar(r.raw(params.scalar_bytes()));
  b.meta = decode_metadata(params, r.prefixed());
  b.proposer_pk = params.decode_element(r.raw(params.element_bytes()));
  b.vrf = crypto::decode_vrf(params, r.raw(32 + 2 * params.scalar_bytes()));
  b.committed_round = r.u64();
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after block");
  return b;
}

}  // namespace mbt::tree
