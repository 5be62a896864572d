#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mbt/tree/block.hpp"

namespace mbt::tree {

// Block of the single-chain baseline: linked by SHA-256 instead of a
// chameleon hash.
struct LinkedBlock {
  BlockIndex index;
  Digest256 pre_hash{};
  Digest256 hash{};
  MetadataPack meta;
  Element proposer_pk;
  crypto::VrfOutput vrf;
  std::uint64_t committed_round = 0;

  friend bool operator==(const LinkedBlock&, const LinkedBlock&) = default;
};

inline constexpr std::string_view kShaBlockDomain = "MBT/sha-block/v1";

// SHA-256(domain | u32 branch | u32 seq | pre_hash | u32 len | metadata | proposer_pk | vrf)
inline Digest256 block_hash(const crypto::GroupParams& params, const LinkedBlock& b) {
  return crypto::Sha256()
      .update(kShaBlockDomain)
      .update(Writer()
                  .u32(b.index.branch)
                  .u32(b.index.seq)
                  .raw(b.pre_hash)
                  .prefixed(encode(params, b.meta))
                  .raw(params.encode(b.proposer_pk))
                  .raw(crypto::encode(params, b.vrf))
                  .bytes())
      .finish();
}

inline Bytes encode(const crypto::GroupParams& params, const LinkedBlock& b) {
  return Writer()
      .u32(b.index.branch)
      .u32(b.index.seq)
      .raw(b.pre_hash)
      .raw(b.hash)
      .prefixed(encode(params, b.meta))
      .raw(params.encode(b.proposer_pk))
      .raw(crypto::encode(params, b.vrf))
      .u64(b.committed_round)
      .bytes();
}

inline LinkedBlock decode_linked_block(const crypto::GroupParams& params, ByteView data) {
  Reader r(data);
  LinkedBlock b;
  b.index.branch = r.u32();
  b.index.seq = r.u32();
  auto pre = r.raw(32);
  std::copy(pre.begin(), pre.end(), b.pre_hash.begin());
  auto h = r.raw(32);
  std::copy(h.begin(), h.end(), b.hash.begin());
  b.meta = decode_metadata(params, r.prefixed());
  b.proposer_pk = params.decode_element(r.raw(params.element_bytes()));
  b.vrf = crypto::decode_vrf(params, r.raw(32 + 2 * params.scalar_bytes()));
  b.committed_round = r.u64();
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after block");
  return b;
}

inline bool digest_valid(const crypto::GroupParams& params, const LinkedBlock& b) {
  return b.hash == block_hash(params, b);
}

/// Single-chain ledger used as the comparison baseline. Exposes the same
/// surface the consensus worker uses on MedBlockTree, with one branch.
class ShaChain {
 public:
  using block_type = LinkedBlock;

  static ShaChain genesis(crypto::Group group, const crypto::KeyPair& authority) {
    ShaChain c(std::move(group));
    LinkedBlock g;
    g.meta = {authority.pk, authority.pk, 0, "genesis", 0};
    g.proposer_pk = authority.pk;
    g.vrf = crypto::vrf_prove(*c.group_, authority, as_bytes("genesis"));
    g.hash = block_hash(*c.group_, g);
    c.blocks_.push_back(std::move(g));
    return c;
  }

  const crypto::GroupParams& params() const { return *group_; }
  const crypto::Group& group() const { return group_; }
  std::vector<BranchId> branch_ids() const { return {kDefaultBranch}; }
  std::size_t branch_count() const { return 1; }
  const std::vector<LinkedBlock>& blocks() const { return blocks_; }
  const LinkedBlock& tip() const { return blocks_.back(); }
  std::size_t block_count() const { return blocks_.size(); }

  LinkedBlock make_block(BranchId branch_id, const MetadataPack& meta, const crypto::KeyPair& proposer,
                         ByteView randomness, crypto::Drbg& /*entropy*/, std::uint64_t round = 0) const {
    if (branch_id != kDefaultBranch) throw Error(ErrorKind::kBranch, "baseline has a single chain");
    if (patients_.contains(meta.patient_pk)) {
      throw Error(ErrorKind::kReturningPatient, "patient already on chain");
    }
    LinkedBlock b;
    b.index = {kDefaultBranch, tip().index.seq + 1};
    b.pre_hash = tip().hash;
    b.meta = meta;
    b.proposer_pk = proposer.pk;
    b.vrf = crypto::vrf_prove(*group_, proposer, randomness);
    b.committed_round = round;
    b.hash = block_hash(*group_, b);
    return b;
  }

  std::optional<std::string> check_successor(const LinkedBlock& b, Verify mode = Verify::kFull) const {
    if (b.index.branch != kDefaultBranch) return "unknown branch";
    if (b.index.seq != tip().index.seq + 1) return "sequence gap";
    if (b.pre_hash != tip().hash) return "pre-hash does not match chain tip";
    if (patients_.contains(b.meta.patient_pk)) return "patient already on chain";
    if (mode == Verify::kFull && !digest_valid(*group_, b)) return "block hash mismatch";
    return std::nullopt;
  }

  AppendReport append_blockmap(const std::map<BranchId, LinkedBlock>& blockmap, Verify mode = Verify::kFull) {
    AppendReport report;
    for (const auto& [id, block] : blockmap) {
      if (auto err = check_successor(block, mode)) {
        report.errors[id] = *err;
        continue;
      }
      patients_.insert(block.meta.patient_pk);
      blocks_.push_back(block);
      report.appended.push_back(id);
    }
    return report;
  }

  bool validate() const {
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
      const auto& b = blocks_[i];
      if (b.index.seq != i || b.hash != block_hash(*group_, b)) return false;
      if (i > 0 && b.pre_hash != blocks_[i - 1].hash) return false;
    }
    return true;
  }

 private:
  explicit ShaChain(crypto::Group group) : group_(std::move(group)) {}

  crypto::Group group_;
  std::vector<LinkedBlock> blocks_;
  std::set<Element> patients_;
};

}  // namespace mbt::tree
