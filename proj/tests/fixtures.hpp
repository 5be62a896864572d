#pragma once

#include <map>
#include <string>

#include "mbt/tree/medblocktree.hpp"

namespace mbt::testing {

using crypto::Drbg;
using crypto::KeyPair;
using tree::Block;
using tree::BlockMap;
using tree::MedBlockTree;
using tree::MetadataPack;

// The walkthrough cast: an authority, a doctor, a worker that proposes
// blocks, and patients Alice, Bob, Claire, Daisy.
struct Cast {
  crypto::Group group = crypto::profiles::test512();
  Drbg rng{2024};
  KeyPair authority = crypto::keygen(*group, as_bytes("authority"));
  KeyPair doctor = crypto::keygen(*group, as_bytes("doctor"));
  KeyPair worker = crypto::keygen(*group, as_bytes("worker"));
  std::map<std::string, KeyPair> patients;
  std::uint64_t next_meta = 1;

  const KeyPair& patient(const std::string& name) {
    auto it = patients.find(name);
    if (it == patients.end()) {
      it = patients.emplace(name, crypto::keygen(*group, as_bytes("patient/" + name))).first;
    }
    return it->second;
  }

  MetadataPack meta(const std::string& name, const std::string& keyword) {
    return {patient(name).pk, doctor.pk, 1000 * next_meta, keyword, next_meta++};
  }

  MedBlockTree genesis() { return MedBlockTree::genesis(group, authority, rng); }

  Block propose(const MedBlockTree& t, tree::BranchId branch, const MetadataPack& m) {
    return t.make_block(branch, m, worker, as_bytes("round-randomness"), rng);
  }

  void commit(MedBlockTree& t, tree::BranchId branch, const MetadataPack& m) {
    auto report = t.append_blockmap({{branch, propose(t, branch, m)}});
    if (!report.ok()) throw Error(ErrorKind::kCrypto, "fixture append failed");
  }

  // genesis -> Alice<cold> -> Bob<COVID> on B1, then Alice<Flu> sprouts B2.
  MedBlockTree two_branch_tree() {
    auto t = genesis();
    commit(t, 1, meta("Alice", "cold"));
    commit(t, 1, meta("Bob", "COVID"));
    t.sprout_branch(t.make_collision(patient("Alice"), meta("Alice", "Flu")));
    return t;
  }

  // two_branch_tree + {B1: Claire<Flu>, B2: Daisy<COVID>} + Colli(Bob<Flu>) as B3.
  MedBlockTree updated_tree() {
    auto t = two_branch_tree();
    auto colli = t.make_collision(patient("Bob"), meta("Bob", "Flu"));
    BlockMap bm{{1, propose(t, 1, meta("Claire", "Flu"))}, {2, propose(t, 2, meta("Daisy", "COVID"))}};
    if (!t.append_blockmap(bm).ok()) throw Error(ErrorKind::kCrypto, "fixture append failed");
    t.sprout_branch(colli);
    return t;
  }
};

}  // namespace mbt::testing
