#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mbt/tree/block.hpp"

namespace mbt::tree {

using crypto::Group;
using crypto::GroupParams;
using crypto::KeyPair;

enum class CollisionReason {
  kDuplicate,      // this collision already roots a branch
  kNoOrigin,       // origin index not on the tree
  kStaleOrigin,    // origin is no longer the patient's latest block
  kHashMismatch,   // h or pre_hash differ from the origin
  kPatientMismatch,
  kBadDigest,      // new metadata does not verify under the patient key
};

inline const char* to_string(CollisionReason r) {
  switch (r) {
    case CollisionReason::kDuplicate: return "duplicate collision";
    case CollisionReason::kNoOrigin: return "origin block not found";
    case CollisionReason::kStaleOrigin: return "origin is not the patient's latest block";
    case CollisionReason::kHashMismatch: return "hash value or pre-hash differs from origin";
    case CollisionReason::kPatientMismatch: return "patient key differs from origin";
    case CollisionReason::kBadDigest: return "chameleon digest does not verify";
  }
  return "unknown";
}

class CollisionRejected : public Error {
 public:
  explicit CollisionRejected(CollisionReason reason)
      : Error(ErrorKind::kRejected, to_string(reason)), reason_(reason) {}
  CollisionReason reason() const noexcept { return reason_; }

 private:
  CollisionReason reason_;
};

enum class FindingKind { kIndex, kLinkage, kVerification, kBranchRoot, kPatientTip };

inline const char* to_string(FindingKind k) {
  switch (k) {
    case FindingKind::kIndex: return "index";
    case FindingKind::kLinkage: return "linkage";
    case FindingKind::kVerification: return "verification";
    case FindingKind::kBranchRoot: return "branch-root";
    case FindingKind::kPatientTip: return "patient-tip";
  }
  return "unknown";
}

struct Finding {
  FindingKind kind;
  BlockIndex where;
  std::string detail;
};

struct ValidationReport {
  std::vector<Finding> findings;

  bool ok() const { return findings.empty(); }
  std::size_t count(FindingKind k) const {
    return static_cast<std::size_t>(
        std::count_if(findings.begin(), findings.end(), [k](const Finding& f) { return f.kind == k; }));
  }
};

inline constexpr std::string_view kGenesisKeywords = "genesis";

/// The block tree: branch 1 is the default chain rooted at genesis, every
/// other branch is rooted at a claimed collision block. Single writer.
class MedBlockTree {
 public:
  using block_type = Block;

  struct Branch {
    std::vector<Block> blocks;
    std::optional<BlockIndex> origin;  // set for every branch except 1
  };

  static MedBlockTree genesis(Group group, const KeyPair& authority, crypto::Drbg& entropy) {
    MedBlockTree t(std::move(group));
    const auto& params = *t.group_;
    Block g;
    g.index = {kDefaultBranch, 0};
    g.pre_hash = Element{0};
    g.meta = {authority.pk, authority.pk, 0, std::string(kGenesisKeywords), 0};
    g.digest = crypto::chamhash(params, authority.pk, encode(params, g.meta), entropy);
    g.proposer_pk = authority.pk;
    g.vrf = crypto::vrf_prove(params, authority, as_bytes(kGenesisKeywords));
    t.patient_tips_[g.meta.patient_pk] = g.index;
    t.branches_[kDefaultBranch].blocks.push_back(std::move(g));
    return t;
  }

  // Rebuilds a tree from stored branches without validating it; patient tips
  // are recomputed by scanning. Used by import.
  static MedBlockTree restore(Group group, std::map<BranchId, Branch> branches) {
    MedBlockTree t(std::move(group));
    t.branches_ = std::move(branches);
    t.patient_tips_ = t.scan_patient_tips();
    return t;
  }

  const GroupParams& params() const { return *group_; }
  const Group& group() const { return group_; }

  std::vector<BranchId> branch_ids() const {
    std::vector<BranchId> ids;
    ids.reserve(branches_.size());
    for (const auto& [id, _] : branches_) ids.push_back(id);
    return ids;
  }
  std::size_t branch_count() const { return branches_.size(); }
  const std::map<BranchId, Branch>& branches() const { return branches_; }

  const Branch& branch(BranchId id) const {
    auto it = branches_.find(id);
    if (it == branches_.end()) throw Error(ErrorKind::kBranch, "unknown branch " + std::to_string(id));
    return it->second;
  }
  const Block& tip(BranchId id) const { return branch(id).blocks.back(); }

  // Latest block per branch.
  std::map<BranchId, std::reference_wrapper<const Block>> former_blocks() const {
    std::map<BranchId, std::reference_wrapper<const Block>> out;
    for (const auto& [id, b] : branches_) out.emplace(id, std::cref(b.blocks.back()));
    return out;
  }

  const Block* find(BlockIndex i) const {
    auto it = branches_.find(i.branch);
    if (it == branches_.end() || i.seq >= it->second.blocks.size()) return nullptr;
    return &it->second.blocks[i.seq];
  }

  std::optional<BlockIndex> patient_tip(const Element& pk) const {
    auto it = patient_tips_.find(pk);
    if (it == patient_tips_.end()) return std::nullopt;
    return it->second;
  }
  const std::map<Element, BlockIndex>& patient_tips() const { return patient_tips_; }

  std::size_t block_count() const {
    std::size_t n = 0;
    for (const auto& [_, b] : branches_) n += b.blocks.size();
    return n;
  }

  // New-patient block for the next slot of `branch`.
  Block make_block(BranchId branch_id, const MetadataPack& meta, const KeyPair& proposer,
                   ByteView randomness, crypto::Drbg& entropy, std::uint64_t round = 0) const {
    const Block& prev = tip(branch_id);
    if (patient_tips_.contains(meta.patient_pk)) {
      throw Error(ErrorKind::kReturningPatient, "patient already has a block; use a collision");
    }
    Block b;
    b.index = {branch_id, prev.index.seq + 1};
    b.pre_hash = prev.digest.h;
    b.meta = meta;
    b.digest = crypto::chamhash(params(), meta.patient_pk, encode(params(), meta), entropy);
    b.proposer_pk = proposer.pk;
    b.vrf = crypto::vrf_prove(params(), proposer, randomness);
    b.committed_round = round;
    return b;
  }

  // Collision for a returning patient over their latest block. The returned
  // block keeps the origin's index until it is sprouted.
  CollisionBlock make_collision(const KeyPair& patient, const MetadataPack& new_meta) const {
    auto origin_index = patient_tip(patient.pk);
    if (!origin_index) throw Error(ErrorKind::kNoOrigin, "patient has no block on the tree");
    if (!(new_meta.patient_pk == patient.pk)) {
      throw Error(ErrorKind::kParameter, "metadata belongs to a different patient");
    }
    const Block& origin = *find(*origin_index);
    const auto new_message = encode(params(), new_meta);
    auto digest = crypto::find_collision(params(), patient, encode(params(), origin.meta), new_message,
                                         origin.digest);
    if (!crypto::verify_with_trapdoor(params(), patient, new_message, digest)) {
      throw Error(ErrorKind::kCrypto, "collision digest failed verification");
    }
    CollisionBlock c;
    c.origin_index = *origin_index;
    c.block.index = origin.index;
    c.block.pre_hash = origin.pre_hash;
    c.block.digest = digest;
    c.block.meta = new_meta;
    c.block.proposer_pk = new_meta.doctor_pk;
    c.block.vrf = crypto::VrfOutput{{}, {crypto::Scalar{0}, crypto::Scalar{0}}};
    return c;
  }

  std::optional<CollisionReason> validate_collision(const CollisionBlock& c) const {
    for (const auto& [id, br] : branches_) {
      if (br.origin && *br.origin == c.origin_index && br.blocks.front().digest == c.block.digest) {
        return CollisionReason::kDuplicate;
      }
    }
    const Block* origin = find(c.origin_index);
    if (!origin) return CollisionReason::kNoOrigin;
    if (!(origin->meta.patient_pk == c.block.meta.patient_pk)) return CollisionReason::kPatientMismatch;
    auto tip_index = patient_tip(c.block.meta.patient_pk);
    if (!tip_index || *tip_index != c.origin_index) return CollisionReason::kStaleOrigin;
    if (!(origin->digest.h == c.block.digest.h) || !(origin->pre_hash == c.block.pre_hash)) {
      return CollisionReason::kHashMismatch;
    }
    if (!crypto::verify(params(), c.block.meta.patient_pk, encode(params(), c.block.meta), c.block.digest)) {
      return CollisionReason::kBadDigest;
    }
    return std::nullopt;
  }

  BranchId sprout_branch(const CollisionBlock& c, std::uint64_t round = 0) {
    if (auto reason = validate_collision(c)) throw CollisionRejected(*reason);
    const BranchId id = branches_.rbegin()->first + 1;
    Block root = c.block;
    root.index = {id, 0};
    root.committed_round = round;
    patient_tips_[root.meta.patient_pk] = root.index;
    auto& br = branches_[id];
    br.origin = c.origin_index;
    br.blocks.push_back(std::move(root));
    return id;
  }

  // Reason the block cannot extend its branch tip, or nullopt if it can.
  std::optional<std::string> check_successor(const Block& b, Verify mode = Verify::kFull) const {
    auto it = branches_.find(b.index.branch);
    if (it == branches_.end()) return "unknown branch";
    const Block& prev = it->second.blocks.back();
    if (b.index.seq != prev.index.seq + 1) return "sequence gap";
    if (!(b.pre_hash == prev.digest.h)) return "pre-hash does not match branch tip";
    if (patient_tips_.contains(b.meta.patient_pk)) return "patient already on tree";
    if (mode == Verify::kFull && !digest_valid(params(), b)) return "chameleon digest does not verify";
    return std::nullopt;
  }

  // Each branch is extended independently; a failing branch is left unchanged.
  AppendReport append_blockmap(const BlockMap& blockmap, Verify mode = Verify::kFull) {
    AppendReport report;
    for (const auto& [id, block] : blockmap) {
      if (block.index.branch != id) {
        report.errors[id] = "block index names a different branch";
        continue;
      }
      if (auto err = check_successor(block, mode)) {
        report.errors[id] = *err;
        continue;
      }
      patient_tips_[block.meta.patient_pk] = block.index;
      branches_[id].blocks.push_back(block);
      report.appended.push_back(id);
    }
    return report;
  }

  ValidationReport validate_tree() const {
    ValidationReport report;
    auto add = [&](FindingKind k, BlockIndex at, std::string detail) {
      report.findings.push_back({k, at, std::move(detail)});
    };
    if (!branches_.contains(kDefaultBranch)) {
      add(FindingKind::kIndex, {kDefaultBranch, 0}, "default chain missing");
      return report;
    }
    for (const auto& [id, br] : branches_) {
      if (br.blocks.empty()) {
        add(FindingKind::kIndex, {id, 0}, "empty branch");
        continue;
      }
      for (std::size_t seq = 0; seq < br.blocks.size(); ++seq) {
        const Block& b = br.blocks[seq];
        const BlockIndex at{id, static_cast<std::uint32_t>(seq)};
        if (b.index != at) add(FindingKind::kIndex, at, "stored index is " + to_string(b.index));
        if (!crypto::verify(params(), b.meta.patient_pk, encode(params(), b.meta), b.digest)) {
          add(FindingKind::kVerification, at, "chameleon digest does not verify under patient key");
        }
        if (seq > 0 && !(b.pre_hash == br.blocks[seq - 1].digest.h)) {
          add(FindingKind::kLinkage, at, "pre-hash differs from predecessor hash value");
        }
      }
      const Block& root = br.blocks.front();
      if (id == kDefaultBranch) {
        if (br.origin || sgn(root.pre_hash.value) != 0) {
          add(FindingKind::kBranchRoot, {id, 0}, "genesis must have zero pre-hash and no origin");
        }
        continue;
      }
      const Block* origin = br.origin ? find(*br.origin) : nullptr;
      if (!origin) {
        add(FindingKind::kBranchRoot, {id, 0}, "branch root has no origin block");
      } else if (!(origin->digest.h == root.digest.h) || !(origin->pre_hash == root.pre_hash) ||
                 !(origin->meta.patient_pk == root.meta.patient_pk)) {
        add(FindingKind::kBranchRoot, {id, 0}, "branch root does not collide with " + to_string(*br.origin));
      }
    }
    auto expected = scan_patient_tips();
    if (expected != patient_tips_) add(FindingKind::kPatientTip, {}, "patient tips disagree with a full scan");
    return report;
  }

 private:
  explicit MedBlockTree(Group group) : group_(std::move(group)) {}

  // A patient's latest block is the one of theirs that no branch of theirs
  // grew out of.
  std::map<Element, BlockIndex> scan_patient_tips() const {
    std::map<Element, std::vector<BlockIndex>> owned;
    std::map<Element, std::vector<BlockIndex>> origins;
    for (const auto& [id, br] : branches_) {
      for (const auto& b : br.blocks) owned[b.meta.patient_pk].push_back(b.index);
      if (br.origin && !br.blocks.empty()) origins[br.blocks.front().meta.patient_pk].push_back(*br.origin);
    }
    std::map<Element, BlockIndex> tips;
    for (const auto& [pk, blocks] : owned) {
      const auto& used = origins[pk];
      for (const auto& i : blocks) {
        if (std::find(used.begin(), used.end(), i) == used.end()) tips[pk] = i;
      }
    }
    return tips;
  }

  Group group_;
  std::map<BranchId, Branch> branches_;
  std::map<Element, BlockIndex> patient_tips_;
};

}  // namespace mbt::tree
