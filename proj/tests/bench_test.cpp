#include <gtest/gtest.h>

#include "mbt/bench/experiment.hpp"
#include "mbt/bench/micro.hpp"
#include "oracles/stats_oracle.hpp"

namespace mbt::bench {
namespace {

TEST(MicroTest, RejectsTooFewIterations) {
  EXPECT_THROW(bench_micro(0), Error);
  EXPECT_THROW(bench_micro(99), Error);
}

TEST(MicroTest, CollisionCheaperThanChameleonBlock) {
  const auto a = bench_micro(200);
  const auto b = bench_micro(200);
  EXPECT_LT(a.mean_ms("colli_block"), a.mean_ms("chame_block"));
  for (const auto& row : a.rows) {
    const double other = b.mean_ms(row.op);
    EXPECT_GT(row.mean_ms, 0) << row.op;
    EXPECT_LT(std::max(row.mean_ms, other) / std::min(row.mean_ms, other), 3.0) << row.op;
  }
  EXPECT_THROW(a.mean_ms("nope"), Error);
}

TEST(StatsTest, ChiSquareMatchesOracle) {
  std::vector<std::uint64_t> counts{2507, 2557, 2417, 2521};
  auto fit = chi_square_fit(counts, {1, 1, 1, 1});
  EXPECT_NEAR(fit.statistic, oracle::chi_square(counts, {1, 1, 1, 1}), 1e-9);
  EXPECT_EQ(fit.dof, 3u);
  EXPECT_TRUE(fit.passes(0.01));
  auto skewed = chi_square_fit({4000, 2000, 2000, 2000}, {1, 1, 1, 1});
  EXPECT_FALSE(skewed.passes(0.01));
  // Statistic at the 1% critical value has p = 0.01.
  EXPECT_NEAR(boost::math::cdf(boost::math::complement(boost::math::chi_squared(3),
                                                       oracle::chi_square_critical(3, 0.01))),
              0.01, 1e-9);
  EXPECT_THROW(chi_square_fit({1, 2}, {1}), Error);
  EXPECT_THROW(chi_square_fit({1, 2}, {1, 0}), Error);
}

TEST(ExperimentTest, DimensionNames) {
  EXPECT_EQ(parse_dimension("d1"), Dimension::kBranches);
  EXPECT_EQ(parse_dimension("D4-collision-rate"), Dimension::kCollisionRate);
  EXPECT_EQ(parse_dimension("d5"), Dimension::kFairness);
  EXPECT_THROW(parse_dimension("d6"), Error);
}

TEST(ExperimentTest, SpecValidation) {
  ExperimentSpec s;
  s.repetitions = 0;
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.sweep = {0};
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.dimension = Dimension::kCollisionRate;
  s.sweep = {-30};
  EXPECT_THROW(s.validate(), Error);
  s = {};
  s.dimension = Dimension::kNodes;
  s.sweep = {4.5};
  EXPECT_THROW(s.validate(), Error);
  s = {};
  EXPECT_NO_THROW(s.validate());
}

TEST(ExperimentTest, EveryPlanHasBaseline) {
  for (auto d : {Dimension::kBranches, Dimension::kLatency, Dimension::kNodes, Dimension::kCollisionRate,
                 Dimension::kFairness}) {
    ExperimentSpec s;
    s.dimension = d;
    auto points = plan(s);
    EXPECT_TRUE(std::any_of(points.begin(), points.end(), [](const auto& p) {
      return p.system == "BC" && p.config.mode == netsim::Mode::kBaseline;
    })) << to_string(d);
  }
}

TEST(ExperimentTest, SummaryRowConsistency) {
  SummaryRow r{"MBT", 1, 0, 10.0, 2.5, 0.4, 20, 25};
  EXPECT_TRUE(r.consistent());
  r.blocks = 30;
  EXPECT_FALSE(r.consistent());
  r = {"MBT", 1, 0, 0, 0, 0, 0, 0};
  EXPECT_FALSE(r.consistent());
}

TEST(ExperimentTest, SmallBranchSweepShape) {
  ExperimentSpec s;
  s.sweep = {1, 2, 4};
  s.base.metadata_count = 120;
  s.threads = 3;
  auto r = run_experiment(s);
  ASSERT_EQ(r.points.size(), 4u);
  EXPECT_EQ(r.points[0].row.system, "BC");  // sorted by system, then key
  double prev = INFINITY;
  for (double n : {1.0, 2.0, 4.0}) {
    const auto& row = r.find("MBT", n).row;
    EXPECT_LT(row.avg_time_per_block_s, prev);
    EXPECT_TRUE(row.consistent());
    prev = row.avg_time_per_block_s;
  }
  EXPECT_EQ(r.find("MBT", 4).row.rounds, 30u);
  EXPECT_NE(r.summary_csv().find("system,key,rep,overall_s,avg_bps,avg_time_per_block_s,rounds,blocks"),
            std::string::npos);
}

TEST(ExperimentTest, FairnessTallyCountsEveryElection) {
  ExperimentSpec s;
  s.dimension = Dimension::kFairness;
  s.sweep = {3};
  s.elections = 300;
  auto r = run_experiment(s);
  ASSERT_EQ(r.fairness.size(), 2u);
  for (const auto& f : r.fairness) {
    std::uint64_t n = 0;
    for (auto w : f.wins) n += w;
    EXPECT_EQ(n, 300u);
    EXPECT_EQ(f.stakes.size(), 4u);
  }
  std::vector<std::uint64_t> stakes = r.fairness[1].stakes;
  std::sort(stakes.begin(), stakes.end());
  EXPECT_EQ(stakes, (std::vector<std::uint64_t>{1, 2, 3, 4}));
}

TEST(ExperimentTest, ErrorsPropagateFromWorkers) {
  ExperimentSpec s;
  s.dimension = Dimension::kNodes;
  s.sweep = {4};
  s.base.max_rounds = 3;
  s.base.metadata_count = 50;
  s.threads = 2;
  EXPECT_THROW(run_experiment(s), Error);
}

}  // namespace
}  // namespace mbt::bench
