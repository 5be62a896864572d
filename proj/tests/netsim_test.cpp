#include <gtest/gtest.h>

#include <set>

#include "mbt/netsim/simulation.hpp"

namespace mbt::netsim {
namespace {

using consensus::Message;
using consensus::MessageKind;
using tree::Block;

Message<Block> dummy(consensus::WorkerId sender) {
  consensus::Vote v;
  v.kind = MessageKind::kPreVote;
  return consensus::make_message<Block>(sender, v);
}

SimConfig small(Mode mode, std::size_t packs) {
  SimConfig c;
  c.mode = mode;
  c.metadata_count = packs;
  c.collision_interval_s = 0;
  return c;
}

TEST(NetworkTest, SingleHopArrivesAfterBaseLatency) {
  SimNetwork<Block> net(2, {100, 0, 1}, crypto::Drbg(1));
  net.send(SimTime{}, 0, {{1, dummy(0)}});
  auto d = net.next();
  ASSERT_TRUE(d);
  EXPECT_EQ(d->at, from_ms(100));
  EXPECT_EQ(d->to, 1u);
  EXPECT_FALSE(net.next());
}

TEST(NetworkTest, SelfCopyIsImmediatePeersSerialize) {
  SimNetwork<Block> net(4, {100, 0, 1}, crypto::Drbg(1));
  net.broadcast(from_ms(5), 2, dummy(2));
  std::vector<std::pair<SimTime, consensus::WorkerId>> got;
  while (auto d = net.next()) got.emplace_back(d->at, d->to);
  ASSERT_EQ(got.size(), 4u);
  EXPECT_EQ(got[0], std::make_pair(from_ms(5), consensus::WorkerId{2}));
  EXPECT_EQ(got[1], std::make_pair(from_ms(105), consensus::WorkerId{0}));
  EXPECT_EQ(got[2], std::make_pair(from_ms(106), consensus::WorkerId{1}));
  EXPECT_EQ(got[3], std::make_pair(from_ms(107), consensus::WorkerId{3}));
  EXPECT_EQ(net.messages_sent(), 4u);
}

TEST(NetworkTest, SameInstantLowerSenderFirst) {
  SimNetwork<Block> net(3, {100, 0, 1}, crypto::Drbg(1));
  net.send(SimTime{}, 2, {{0, dummy(2)}});
  net.send(SimTime{}, 1, {{0, dummy(1)}});
  auto a = net.next();
  auto b = net.next();
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->at, b->at);
  EXPECT_EQ(std::get<Message<Block>>(a->what).sender, 1u);
  EXPECT_EQ(std::get<Message<Block>>(b->what).sender, 2u);
}

TEST(NetworkTest, JitteredDeliveriesNeverPrecedeSend) {
  LatencyModel m{100, 50, 1};
  crypto::Drbg rng(2);
  SimTime lo = SimTime::max(), hi = SimTime::min();
  for (int i = 0; i < 10000; ++i) {
    const SimTime depart = from_ms(static_cast<double>(i % 977));
    const auto at = delivery_time(depart, 0, m, rng);
    ASSERT_GE(at, depart);
    ASSERT_LE(at - depart, m.hop_bound(0));
    lo = std::min(lo, at - depart);
    hi = std::max(hi, at - depart);
  }
  EXPECT_LT(lo, from_ms(101));
  EXPECT_GT(hi, from_ms(149));
}

TEST(NetworkTest, RejectsNegativeLatency) {
  EXPECT_THROW(SimNetwork<Block>(2, {-1, 0, 1}, crypto::Drbg(1)), Error);
  EXPECT_THROW(SimNetwork<Block>(2, {100, 0, 1}, crypto::Drbg(1)).send(SimTime{}, 0, {{5, dummy(0)}}), Error);
}

TEST(EventQueueTest, OrdersByTimeKindSenderSequence) {
  EventQueue<int> q;
  q.push(from_ms(2), EventKind::kMessage, 0, 1);
  q.push(from_ms(1), EventKind::kRoundTimer, 0, 2);
  q.push(from_ms(1), EventKind::kMessage, 3, 3);
  q.push(from_ms(1), EventKind::kMessage, 1, 4);
  q.push(from_ms(1), EventKind::kCollisionRelease, 0, 5);
  q.push(from_ms(1), EventKind::kMessage, 1, 6);
  std::vector<int> order;
  while (!q.empty()) order.push_back(q.pop().payload);
  EXPECT_EQ(order, (std::vector<int>{4, 6, 3, 5, 2, 1}));
}

TEST(MetricsTest, MillisecondFormatRoundTrips) {
  for (std::int64_t us : {0LL, 1LL, 999LL, 1000LL, 123456789LL, -2500LL}) {
    EXPECT_EQ(parse_ms(format_ms(SimTime(us))), SimTime(us)) << us;
  }
  EXPECT_EQ(format_ms(SimTime(62500)), "62.500");
  EXPECT_THROW(parse_ms("1.0001"), Error);
}

TEST(MetricsTest, CsvHeaderAndSummary) {
  MetricsLog log;
  RoundRecord r;
  r.round = 1;
  r.self = from_ms(62);
  r.net = from_ms(338);
  r.db = from_ms(100);
  r.blocks = 2;
  r.branches = 2;
  r.winners = {{1, 0}, {2, 3}};
  log.append(r);
  r.round = 2;
  r.blocks = 3;
  log.append(r);
  const auto csv = log.to_csv();
  EXPECT_NE(csv.find("round,phase_self_ms,phase_net_ms,phase_db_ms,blocks,branches,winner_list\n"), std::string::npos);
  EXPECT_NE(csv.find("1,62.000,338.000,100.000,2,2,B1:W0|B2:W3\n"), std::string::npos);
  auto s = log.summary();
  EXPECT_EQ(s.rounds, 2u);
  EXPECT_DOUBLE_EQ(s.overall_s, 1.0);
  EXPECT_DOUBLE_EQ(s.avg_bps, 5.0);
  EXPECT_DOUBLE_EQ(s.avg_time_per_block_s, 0.2);
  r.net = SimTime(-1);
  EXPECT_THROW(log.append(r), Error);
}

TEST(ConfigTest, RejectsBadSettings) {
  SimConfig c;
  c.worker_count = 0;
  EXPECT_THROW(simulate(c), Error);
  c = {};
  c.tokens_per_worker = {1, 0, 1, 1};
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.behaviors.assign(4, consensus::Behavior::kSilent);
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.mode = Mode::kBaseline;
  c.initial_branches = 3;
  EXPECT_THROW(c.validate(), Error);
  c = {};
  c.latency.base_ms = -5;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_mode("bc"), Mode::kBaseline);
  EXPECT_EQ(parse_mode("medblocktree"), Mode::kMedBlockTree);
  EXPECT_THROW(parse_mode("dag"), Error);
}

TEST(SimulationTest, BaselineOneBlockPerRound) {
  auto report = simulate(small(Mode::kBaseline, 100));
  EXPECT_EQ(report.log.size(), 100u);
  EXPECT_EQ(report.ledger_blocks, 101u);
  EXPECT_TRUE(report.ledger_valid);
  EXPECT_TRUE(report.store_matches);
  const SimTime hop = from_ms(100);
  for (const auto& r : report.log.records()) {
    EXPECT_EQ(r.blocks, 1u);
    EXPECT_EQ(r.self, from_ms(55));
    EXPECT_GE(r.net, 3 * hop);
    EXPECT_EQ(r.db, from_ms(11));
  }
}

TEST(SimulationTest, SingleBranchWithoutReturnsMatchesPoolSize) {
  auto report = simulate(small(Mode::kMedBlockTree, 60));
  EXPECT_EQ(report.log.size(), 60u);
  EXPECT_EQ(report.final_branches, 1u);
  EXPECT_EQ(report.failed_rounds, 0u);
}

TEST(SimulationTest, BranchesDivideRounds) {
  auto c = small(Mode::kMedBlockTree, 60);
  c.initial_branches = 4;
  auto report = simulate(c);
  EXPECT_EQ(report.log.size(), 15u);
  for (const auto& r : report.log.records()) {
    EXPECT_EQ(r.blocks, 4u);
    // A worker forms the blocks it won two at a time.
    EXPECT_GE(r.self, from_ms(62));
    EXPECT_LE(r.self, 2 * from_ms(62));
    EXPECT_EQ(r.db, 4 * from_ms(11));
  }
}

TEST(SimulationTest, SameSeedSameCsv) {
  auto c = small(Mode::kMedBlockTree, 40);
  c.collision_interval_s = 1;
  c.latency.jitter_ms = 20;
  c.rng_seed = 11;
  const auto a = simulate(c, true);
  const auto b = simulate(c, true);
  EXPECT_EQ(a.log.to_csv(), b.log.to_csv());
  EXPECT_EQ(a.tree_text, b.tree_text);
  c.rng_seed = 12;
  EXPECT_NE(simulate(c).log.to_csv(), a.log.to_csv());
}

TEST(SimulationTest, ReturnsGrowBranchesAndConserveBlocks) {
  auto c = small(Mode::kMedBlockTree, 80);
  c.collision_interval_s = 1;
  auto report = simulate(c, true);
  EXPECT_GT(report.claimed, 0u);
  EXPECT_EQ(report.log.total_blocks(), c.metadata_count + report.claimed);
  EXPECT_EQ(report.ledger_blocks, 1 + report.log.total_blocks());
  EXPECT_EQ(report.final_branches, 1 + report.claimed);
  std::size_t prev = 1;
  for (const auto& r : report.log.records()) {
    EXPECT_GE(r.branches, prev);
    EXPECT_EQ(r.duration(), r.self + r.net + r.db);
    EXPECT_EQ(r.db, from_ms(11) * static_cast<std::int64_t>(r.blocks));
    prev = r.branches;
  }
  EXPECT_TRUE(report.ledger_valid);
  EXPECT_TRUE(report.store_matches);

  // The exported tree imports and validates; every return is a collision
  // whose patient already had a committed visit.
  auto t = tree::import_text(report.tree_text);
  EXPECT_TRUE(t.validate_tree().ok());
  std::set<crypto::Element> seen;
  for (tree::BranchId b = 1; b <= t.branch_count(); ++b) {
    for (const auto& blk : t.branch(b).blocks) {
      if (blk.meta.keywords == "return-visit") {
        EXPECT_TRUE(seen.contains(blk.meta.patient_pk));
      }
      seen.insert(blk.meta.patient_pk);
    }
  }
}

TEST(SimulationTest, ActorReleasesOnSchedule) {
  auto c = small(Mode::kMedBlockTree, 700);
  c.collision_interval_s = 60;
  c.max_rounds = 0;
  auto report = simulate(c);
  // Every release ready by the end of the run was claimed or skipped.
  const double end_s = report.log.summary().overall_s;
  std::uint64_t ready = 0;
  for (std::uint64_t tick = 1; 60.0 * tick + 0.027 <= end_s; ++tick) ++ready;
  EXPECT_GE(report.claimed + report.skipped_releases, ready - 1);
  EXPECT_LE(report.claimed + report.skipped_releases, ready);
  EXPECT_GE(report.claimed, 2u);
}

TEST(CollisionActorTest, FourReturnsByFourMinutes) {
  auto group = crypto::profiles::test512();
  crypto::Drbg rng(3);
  auto authority = crypto::keygen(*group, rng);
  auto doctor = crypto::keygen(*group, rng);
  auto t = tree::MedBlockTree::genesis(group, authority, rng);
  std::map<crypto::Element, crypto::KeyPair> patients;
  std::vector<crypto::Element> order;
  for (int i = 0; i < 5; ++i) {
    auto kp = crypto::keygen(*group, rng);
    auto meta = tree::MetadataPack{kp.pk, doctor.pk, static_cast<std::uint64_t>(i), "visit", static_cast<std::uint64_t>(i + 1)};
    auto block = t.make_block(1, meta, authority, as_bytes("r"), rng);
    ASSERT_TRUE(t.append_blockmap({{1, block}}).ok());
    patients.emplace(kp.pk, kp);
    order.push_back(kp.pk);
  }
  CollisionActor actor(from_ms(60000), from_ms(27), std::nullopt, doctor.pk,
                       [&](const crypto::Element& pk) -> const crypto::KeyPair& { return patients.at(pk); }, 100);
  EXPECT_EQ(actor.ready_time(1), from_ms(60027));
  for (const auto& pk : order) actor.note_committed(pk, 1);

  // Nothing is ready before the first tick, and round-1 patients cannot
  // return within round 1.
  EXPECT_TRUE(actor.claim(t, from_ms(60000), 2).empty());
  EXPECT_TRUE(actor.claim(t, from_ms(61000), 1).empty());
  EXPECT_EQ(actor.skipped(), 1u);

  auto out = actor.claim(t, from_ms(240027), 2);
  ASSERT_EQ(out.size(), 3u);
  EXPECT_EQ(actor.released(), 3u);
  std::uint64_t id = 100;
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_FALSE(t.validate_collision(out[i]));
    EXPECT_EQ(out[i].block.meta.patient_pk, order[i]);  // least recently returned first
    EXPECT_EQ(out[i].block.meta.keywords, "return-visit");
    EXPECT_EQ(out[i].block.meta.meta_id, id++);
    t.sprout_branch(out[i]);
  }
  EXPECT_EQ(actor.released() + actor.skipped(), 4u);
  EXPECT_EQ(t.branch_count(), 4u);
  EXPECT_TRUE(t.validate_tree().ok());
}

TEST(SimulationTest, BranchCapStopsReturns) {
  auto c = small(Mode::kMedBlockTree, 80);
  c.collision_interval_s = 1;
  c.branch_cap = 3;
  auto report = simulate(c);
  EXPECT_EQ(report.final_branches, 3u);
  EXPECT_GT(report.skipped_releases, 0u);
}

}  // namespace
}  // namespace mbt::netsim
