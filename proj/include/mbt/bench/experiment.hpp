#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "mbt/bench/stats.hpp"
#include "mbt/netsim/simulation.hpp"

namespace mbt::bench {

enum class Dimension { kBranches, kLatency, kNodes, kCollisionRate, kFairness };

inline const char* to_string(Dimension d) {
  switch (d) {
    case Dimension::kBranches: return "D1-branches";
    case Dimension::kLatency: return "D2-latency";
    case Dimension::kNodes: return "D3-nodes";
    case Dimension::kCollisionRate: return "D4-collision-rate";
    case Dimension::kFairness: return "D5-fairness";
  }
  return "?";
}

inline Dimension parse_dimension(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  for (auto d : {Dimension::kBranches, Dimension::kLatency, Dimension::kNodes, Dimension::kCollisionRate,
                 Dimension::kFairness}) {
    std::string full = to_string(d);
    std::transform(full.begin(), full.end(), full.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == full || s == full.substr(0, 2)) return d;
  }
  throw Error(ErrorKind::kConfig, "unknown dimension '" + s + "'");
}

struct ExperimentSpec {
  Dimension dimension = Dimension::kBranches;
  std::vector<double> sweep;  // empty: the dimension's standard values
  unsigned repetitions = 1;
  std::uint64_t seed = 1;
  netsim::SimConfig base;     // everything the sweep does not vary
  unsigned threads = 1;
  std::size_t elections = 10000;  // D5 only

  std::vector<double> sweep_values() const {
    if (!sweep.empty()) return sweep;
    switch (dimension) {
      case Dimension::kBranches: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
      case Dimension::kLatency: return {100, 200};
      case Dimension::kNodes: return {4, 8, 12, 16};
      case Dimension::kCollisionRate: return {30, 60, 90, 120};
      case Dimension::kFairness: return {3, 6, 9};
    }
    return {};
  }

  void validate() const {
    if (repetitions < 1) throw Error(ErrorKind::kConfig, "repetitions must be at least 1");
    if (threads < 1) throw Error(ErrorKind::kConfig, "threads must be at least 1");
    for (double v : sweep_values()) {
      const bool integral = v == std::floor(v);
      switch (dimension) {
        case Dimension::kBranches:
        case Dimension::kFairness:
          if (!integral || v < 1 || v > 64) throw Error(ErrorKind::kConfig, "branch counts must be 1..64");
          break;
        case Dimension::kNodes:
          if (!integral || v < 1 || v > 256) throw Error(ErrorKind::kConfig, "worker counts must be 1..256");
          break;
        case Dimension::kLatency:
          if (v < 0) throw Error(ErrorKind::kConfig, "latency must be non-negative");
          break;
        case Dimension::kCollisionRate:
          if (v <= 0) throw Error(ErrorKind::kConfig, "collision intervals must be positive");
          break;
      }
    }
    if (dimension == Dimension::kFairness && elections < 1) throw Error(ErrorKind::kConfig, "no elections");
    base.validate();
  }
};

struct SummaryRow {
  std::string system;
  double key = 0;  // sweep value; 0 for a lone baseline row
  unsigned rep = 0;
  double overall_s = 0;
  double avg_bps = 0;
  double avg_time_per_block_s = 0;
  std::uint64_t rounds = 0;
  std::uint64_t blocks = 0;

  // bps * time reproduces the block count to within rounding.
  bool consistent() const {
    return rounds >= 1 && std::abs(avg_bps * overall_s - static_cast<double>(blocks)) <= 1.0 &&
           std::abs(avg_time_per_block_s * static_cast<double>(blocks) - overall_s) <= 1e-6 * (1 + overall_s);
  }
};

struct FairnessRow {
  std::string system;
  double key = 0;
  std::vector<std::uint64_t> stakes;  // by worker id
  std::vector<std::uint64_t> wins;
  ChiSquare fit;
};

struct PointResult {
  SummaryRow row;
  std::string metrics_csv;
  netsim::SimReport report;
};

struct ExperimentResult {
  Dimension dimension = Dimension::kBranches;
  std::vector<PointResult> points;  // sorted by (system, key, rep)
  std::vector<FairnessRow> fairness;

  std::vector<SummaryRow> rows() const {
    std::vector<SummaryRow> out;
    for (const auto& p : points) out.push_back(p.row);
    return out;
  }

  const PointResult& find(const std::string& system, double key, unsigned rep = 0) const {
    for (const auto& p : points) {
      if (p.row.system == system && p.row.key == key && p.row.rep == rep) return p;
    }
    throw Error(ErrorKind::kParameter, "no row " + system);
  }

  std::string summary_csv() const {
    std::ostringstream out;
    out.precision(9);
    out << "# mbt-summary v1 " << to_string(dimension) << '\n'
        << "system,key,rep,overall_s,avg_bps,avg_time_per_block_s,rounds,blocks\n";
    for (const auto& p : points) {
      const auto& r = p.row;
      out << r.system << ',' << r.key << ',' << r.rep << ',' << r.overall_s << ',' << r.avg_bps << ','
          << r.avg_time_per_block_s << ',' << r.rounds << ',' << r.blocks << '\n';
    }
    return out.str();
  }

  std::string fairness_csv() const {
    std::ostringstream out;
    out.precision(9);
    out << "# mbt-fairness v1\nsystem,key,worker,stake,wins,share,expected_share,chi_square,p_value\n";
    for (const auto& f : fairness) {
      std::uint64_t n = 0, s = 0;
      for (auto w : f.wins) n += w;
      for (auto x : f.stakes) s += x;
      for (std::size_t i = 0; i < f.wins.size(); ++i) {
        out << f.system << ',' << f.key << ",W" << i << ',' << f.stakes[i] << ',' << f.wins[i] << ','
            << static_cast<double>(f.wins[i]) / static_cast<double>(n) << ','
            << static_cast<double>(f.stakes[i]) / static_cast<double>(s) << ',' << f.fit.statistic << ','
            << f.fit.p_value << '\n';
      }
    }
    return out.str();
  }
};

struct SweepPoint {
  std::string system;
  double key = 0;
  unsigned rep = 0;
  netsim::SimConfig config;
};

inline SummaryRow summarize(const SweepPoint& p, const netsim::MetricsLog& log) {
  const auto s = log.summary();
  SummaryRow r{p.system, p.key, p.rep, s.overall_s, s.avg_bps, s.avg_time_per_block_s, s.rounds, s.blocks};
  if (!r.consistent()) throw Error(ErrorKind::kConflict, "inconsistent summary row for " + p.system);
  return r;
}

/// Runs independent simulations on up to `threads` threads. The result
/// order depends only on the points, never on scheduling.
inline std::vector<PointResult> run_sweep(const std::vector<SweepPoint>& points, unsigned threads) {
  std::vector<PointResult> results(points.size());
  std::vector<std::exception_ptr> errors(points.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
      try {
        auto report = netsim::simulate(points[i].config);
        results[i].row = summarize(points[i], report.log);
        results[i].metrics_csv = report.log.to_csv();
        results[i].report = std::move(report);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned n = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(points.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::sort(results.begin(), results.end(), [](const auto& a, const auto& b) {
    return std::tie(a.row.system, a.row.key, a.row.rep) < std::tie(b.row.system, b.row.key, b.row.rep);
  });
  return results;
}

inline std::vector<SweepPoint> plan(const ExperimentSpec& spec) {
  std::vector<SweepPoint> out;
  for (unsigned rep = 0; rep < spec.repetitions; ++rep) {
    auto cfg_for = [&](netsim::Mode mode) {
      auto c = spec.base;
      c.mode = mode;
      c.rng_seed = spec.seed + rep;
      if (mode == netsim::Mode::kBaseline) {
        c.initial_branches = 1;
        c.collision_interval_s = 0;
        c.branch_cap.reset();
      }
      return c;
    };
    const auto baseline = [&](double key) {
      out.push_back({"BC", key, rep, cfg_for(netsim::Mode::kBaseline)});
    };
    for (double v : spec.sweep_values()) {
      auto c = cfg_for(netsim::Mode::kMedBlockTree);
      switch (spec.dimension) {
        case Dimension::kBranches:
          c.initial_branches = static_cast<std::size_t>(v);
          c.collision_interval_s = 0;
          out.push_back({"MBT", v, rep, c});
          break;
        case Dimension::kLatency: {
          c.latency.base_ms = v;
          out.push_back({"MBT", v, rep, c});
          auto b = cfg_for(netsim::Mode::kBaseline);
          b.latency.base_ms = v;
          out.push_back({"BC", v, rep, b});
          break;
        }
        case Dimension::kNodes:
          c.worker_count = static_cast<std::size_t>(v);
          c.tokens_per_worker.clear();
          c.behaviors.clear();
          out.push_back({"MBT", v, rep, c});
          break;
        case Dimension::kCollisionRate:
          c.collision_interval_s = v;
          out.push_back({"MBT", v, rep, c});
          break;
        case Dimension::kFairness: {
          const auto branches = static_cast<std::size_t>(v);
          c.initial_branches = branches;
          c.collision_interval_s = 0;
          c.tokens_per_worker.clear();
          c.metadata_count = (spec.elections + branches - 1) / branches * branches;
          out.push_back({"MBT", v, rep, c});
          break;
        }
      }
    }
    if (spec.dimension == Dimension::kFairness) {
      // Stake-weighted run on the smallest branch configuration.
      auto c = cfg_for(netsim::Mode::kMedBlockTree);
      const auto branches = static_cast<std::size_t>(spec.sweep_values().front());
      c.initial_branches = branches;
      c.collision_interval_s = 0;
      c.worker_count = 4;
      c.behaviors.clear();
      c.tokens_per_worker = {1, 2, 3, 4};
      c.metadata_count = (spec.elections + branches - 1) / branches * branches;
      out.push_back({"MBT-stake", static_cast<double>(branches), rep, c});
    }
    if (spec.dimension != Dimension::kLatency) baseline(static_cast<double>(spec.base.worker_count));
  }
  return out;
}

inline FairnessRow tally(const PointResult& p) {
  FairnessRow f;
  f.system = p.row.system;
  f.key = p.row.key;
  f.stakes = p.report.stake_by_worker;
  f.wins.assign(f.stakes.size(), 0);
  for (const auto& r : p.report.log.records()) {
    for (const auto& [_, w] : r.winners) ++f.wins.at(w);
  }
  f.fit = chi_square_fit(f.wins, f.stakes);
  return f;
}

inline ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult out;
  out.dimension = spec.dimension;
  out.points = run_sweep(plan(spec), spec.threads);
  if (spec.dimension == Dimension::kFairness) {
    for (const auto& p : out.points) {
      if (p.row.system.rfind("MBT", 0) == 0) out.fairness.push_back(tally(p));
    }
  }
  return out;
}

}  // namespace mbt::bench
