#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mbt/consensus/worker.hpp"
#include "mbt/netsim/cost_model.hpp"
#include "mbt/netsim/latency.hpp"

namespace mbt::netsim {

enum class Mode { kMedBlockTree, kBaseline };

inline const char* to_string(Mode m) { return m == Mode::kBaseline ? "baseline" : "medblocktree"; }

inline Mode parse_mode(const std::string& s) {
  if (s == "medblocktree" || s == "mbt") return Mode::kMedBlockTree;
  if (s == "baseline" || s == "bc") return Mode::kBaseline;
  throw Error(ErrorKind::kConfig, "unknown mode '" + s + "'");
}

struct SimConfig {
  Mode mode = Mode::kMedBlockTree;
  std::size_t worker_count = 4;
  std::vector<std::uint64_t> tokens_per_worker;      // empty: one token each
  std::vector<consensus::Behavior> behaviors;        // empty: all honest
  LatencyModel latency;
  std::size_t metadata_count = 2000;
  double collision_interval_s = 60.0;                // 0 disables returns
  std::size_t initial_branches = 1;                  // tree pre-seeded to this many
  std::optional<std::size_t> branch_cap;
  std::uint64_t rng_seed = 1;
  std::string group = "test512";
  CostModel cost;
  std::uint64_t max_rounds = 0;                      // 0: derived from the pool size

  void validate() const {
    if (worker_count < 1) throw Error(ErrorKind::kConfig, "worker_count must be at least 1");
    if (!tokens_per_worker.empty() && tokens_per_worker.size() != worker_count) {
      throw Error(ErrorKind::kConfig, "tokens_per_worker needs one entry per worker");
    }
    for (auto t : tokens_per_worker) {
      if (t == 0) throw Error(ErrorKind::kConfig, "every worker needs at least one token");
    }
    if (!behaviors.empty() && behaviors.size() != worker_count) {
      throw Error(ErrorKind::kConfig, "behaviors needs one entry per worker");
    }
    if (!behaviors.empty() &&
        std::none_of(behaviors.begin(), behaviors.end(), [](auto b) { return b == consensus::Behavior::kHonest; })) {
      throw Error(ErrorKind::kConfig, "at least one worker must be honest");
    }
    latency.validate();
    cost.validate();
    if (collision_interval_s < 0) throw Error(ErrorKind::kConfig, "collision interval must be non-negative");
    if (initial_branches < 1) throw Error(ErrorKind::kConfig, "initial_branches must be at least 1");
    if (mode == Mode::kBaseline && initial_branches != 1) {
      throw Error(ErrorKind::kConfig, "baseline runs a single chain");
    }
    if (branch_cap && *branch_cap < initial_branches) {
      throw Error(ErrorKind::kConfig, "branch_cap is below initial_branches");
    }
  }

  std::uint64_t tokens(std::size_t worker) const {
    return tokens_per_worker.empty() ? 1 : tokens_per_worker.at(worker);
  }

  consensus::Behavior behavior(std::size_t worker) const {
    return behaviors.empty() ? consensus::Behavior::kHonest : behaviors.at(worker);
  }

  std::uint64_t round_limit() const { return max_rounds ? max_rounds : 2 * metadata_count + 100; }

  bool collisions_enabled() const { return mode == Mode::kMedBlockTree && collision_interval_s > 0; }
};

}  // namespace mbt::netsim
