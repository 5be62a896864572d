#pragma once

#include <algorithm>
#include <set>

#include "mbt/consensus/round.hpp"
#include "mbt/netsim/collision_actor.hpp"
#include "mbt/netsim/config.hpp"
#include "mbt/netsim/metrics.hpp"
#include "mbt/netsim/network.hpp"
#include "mbt/tree/text_io.hpp"

namespace mbt::netsim {

struct SimReport {
  MetricsLog log;
  std::uint64_t claimed = 0;
  std::uint64_t skipped_releases = 0;
  std::uint64_t failed_rounds = 0;
  std::uint64_t messages = 0;
  std::size_t final_branches = 0;
  std::size_t ledger_blocks = 0;
  bool ledger_valid = false;
  // Reference store holds exactly the flattened ledger.
  bool store_matches = false;
  std::string tree_text;  // exported tree (MedBlockTree mode only)
  std::vector<std::uint64_t> stake_by_worker;  // indexed by WorkerId
};

namespace detail {

struct Population {
  crypto::Group group;
  crypto::KeyPair authority;
  crypto::KeyPair doctor;
  std::vector<consensus::WorkerIdentity> workers;
  std::vector<consensus::Behavior> behaviors;
  std::map<crypto::Element, crypto::KeyPair> patients;
  std::vector<tree::MetadataPack> pool;
};

inline Population populate(const SimConfig& cfg, const crypto::Drbg& root) {
  Population p;
  p.group = crypto::profiles::by_name(cfg.group);
  const auto& params = *p.group;
  auto rng = root.fork("authority");
  p.authority = crypto::keygen(params, rng);
  rng = root.fork("doctor");
  p.doctor = crypto::keygen(params, rng);
  for (std::size_t i = 0; i < cfg.worker_count; ++i) {
    rng = root.fork("worker-key", i);
    p.workers.push_back({crypto::keygen(params, rng), cfg.tokens(i)});
    p.behaviors.push_back(cfg.behavior(i));
  }
  for (std::size_t i = 0; i < cfg.metadata_count; ++i) {
    rng = root.fork("patient", i);
    auto kp = crypto::keygen(params, rng);
    p.pool.push_back({kp.pk, p.doctor.pk, i, "visit-" + std::to_string(i), i + 1});
    p.patients.emplace(kp.pk, kp);
  }
  return p;
}

template <class Ledger>
bool store_matches(const Ledger& ledger, const store::BlockStore& s) {
  std::multiset<Bytes> expected, actual;
  consensus::for_each_block<typename Ledger::block_type>(
      ledger, [&](const auto& b) { expected.insert(consensus::encode_block(ledger.params(), b)); });
  for (const auto& r : s.records()) actual.insert(r.payload);
  return expected == actual;
}

template <class Ledger>
SimReport drive(const SimConfig& cfg, Population pop, Ledger genesis, const crypto::Drbg& root, bool export_tree) {
  using BlockT = typename Ledger::block_type;
  const auto& cost = cfg.cost;
  consensus::Timing timing;
  timing.block_cost = from_ms(cfg.mode == Mode::kBaseline ? cost.sha_block_ms : cost.chame_block_ms);
  timing.cores = cost.worker_cores;
  auto cluster = consensus::make_cluster(genesis, pop.workers, pop.behaviors, timing, from_ms(cost.db_write_ms),
                                         root.fork("workers"));
  SimNetwork<BlockT> net(cfg.worker_count, cfg.latency, root.fork("network"));

  const SimTime interval = cfg.collisions_enabled() ? from_ms(cfg.collision_interval_s * 1000.0) : SimTime{};
  CollisionActor actor(
      interval, from_ms(cost.colli_block_ms), cfg.branch_cap, pop.doctor.pk,
      [&](const crypto::Element& pk) -> const crypto::KeyPair& { return pop.patients.at(pk); },
      cfg.metadata_count + 1);

  SimReport report;
  std::vector<tree::MetadataPack> pool = std::move(pop.pool);
  SimTime now{};
  for (std::uint64_t round = 1; !pool.empty(); ++round) {
    if (round > cfg.round_limit()) {
      throw Error(ErrorKind::kConfig, "pool not drained after " + std::to_string(cfg.round_limit()) + " rounds");
    }
    const auto& ref = cluster.reference();
    const auto branches = ref.ledger().branch_count();
    const SimTime hop = cfg.latency.hop_bound(cfg.worker_count);
    timing.proposal_timeout = consensus::self_cost(timing, branches) + 2 * hop;
    timing.round_timeout = timing.proposal_timeout + 4 * hop;
    cluster.set_timing(timing);

    consensus::CollisionSource claims;
    if constexpr (std::is_same_v<Ledger, tree::MedBlockTree>) {
      if (actor.enabled()) {
        claims = [&](SimTime t) { return actor.claim(cluster.reference().ledger(), t, round); };
      }
    }
    auto outcome = consensus::run_round(cluster, round, now, pool, net, claims);
    if (outcome.conflicting) {
      throw Error(ErrorKind::kConflict, "honest workers committed different BlockMaps in round " +
                                            std::to_string(round));
    }
    if (outcome.committed) {
      std::set<std::uint64_t> done;
      for (const auto& [_, block] : outcome.blockmap) {
        done.insert(block.meta.meta_id);
        actor.note_committed(block.meta.patient_pk, round);
      }
      std::erase_if(pool, [&](const auto& m) { return done.contains(m.meta_id); });
    } else {
      ++report.failed_rounds;
    }
    report.claimed += outcome.sprouted.size();

    RoundRecord rec;
    rec.round = round;
    rec.self = outcome.times.self();
    rec.net = outcome.times.net();
    rec.db = outcome.times.db();
    rec.blocks = outcome.blocks();
    rec.branches = cluster.reference().ledger().branch_count();
    rec.committed = outcome.committed;
    rec.winners = outcome.winners;
    report.log.append(std::move(rec));
    now = outcome.times.end;
  }

  const auto& ref = cluster.reference();
  report.skipped_releases = actor.skipped();
  report.messages = net.messages_sent();
  report.final_branches = ref.ledger().branch_count();
  for (const auto& e : cluster.table->entries()) report.stake_by_worker.push_back(e.tokens);
  report.ledger_blocks = ref.ledger().block_count();
  report.store_matches = store_matches(ref.ledger(), ref.store());
  if constexpr (std::is_same_v<Ledger, tree::MedBlockTree>) {
    report.ledger_valid = ref.ledger().validate_tree().ok();
    if (export_tree) report.tree_text = tree::export_text(ref.ledger());
  } else {
    report.ledger_valid = ref.ledger().validate();
  }
  return report;
}

}  // namespace detail

// D1-style fixed branch counts: the authority repeatedly collides its own
// genesis record, each collision rooting one more branch.
inline void preseed_branches(tree::MedBlockTree& t, const crypto::KeyPair& authority, std::size_t branches) {
  for (std::uint64_t i = 1; t.branch_count() < branches; ++i) {
    tree::MetadataPack meta{authority.pk, authority.pk, 0, "seed-" + std::to_string(i), 0};
    t.sprout_branch(t.make_collision(authority, meta));
  }
}

inline SimReport simulate(const SimConfig& cfg, bool export_tree = false) {
  cfg.validate();
  const crypto::Drbg root(cfg.rng_seed);
  auto pop = detail::populate(cfg, root);
  if (cfg.mode == Mode::kBaseline) {
    auto chain = tree::ShaChain::genesis(pop.group, pop.authority);
    return detail::drive(cfg, std::move(pop), std::move(chain), root, false);
  }
  auto entropy = root.fork("genesis");
  auto tree = tree::MedBlockTree::genesis(pop.group, pop.authority, entropy);
  preseed_branches(tree, pop.authority, cfg.initial_branches);
  return detail::drive(cfg, std::move(pop), std::move(tree), root, export_tree);
}

inline MetricsLog run_simulation(const SimConfig& cfg) { return simulate(cfg).log; }

}  // namespace mbt::netsim
