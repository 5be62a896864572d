// mbt: experiment harness, micro benchmarks, and tree validation.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "mbt/bench/experiment.hpp"
#include "mbt/bench/micro.hpp"

namespace {

using namespace mbt;
using nlohmann::json;
namespace fs = std::filesystem;

// Exit codes.
constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

struct SimFlags {
  std::size_t workers = 4;
  double latency_ms = 100;
  double jitter_ms = 0;
  std::size_t metadata_count = 2000;
  double collision_interval_s = 60;
  std::size_t branches = 1;
  std::optional<std::size_t> branch_cap;
  std::uint64_t seed = 1;
  std::string mode = "medblocktree";
  std::string group = "test512";
  std::string out;

  void add_to(CLI::App& app) {
    app.add_option("--workers", workers, "Worker count")->check(CLI::PositiveNumber);
    app.add_option("--latency-ms", latency_ms, "Per-link delay")->check(CLI::NonNegativeNumber);
    app.add_option("--jitter-ms", jitter_ms, "Uniform jitter bound")->check(CLI::NonNegativeNumber);
    app.add_option("--metadata-count", metadata_count, "Metadata packs in the pool");
    app.add_option("--collision-interval-s", collision_interval_s, "Seconds between returns, 0 disables")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--branches", branches, "Branches pre-seeded before the run")->check(CLI::PositiveNumber);
    app.add_option("--branch-cap", branch_cap, "Maximum branch count");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--mode", mode, "medblocktree | baseline");
    app.add_option("--group", group, "Group profile: tiny | test512 | demo2048");
    app.add_option("--out", out, "Output directory");
  }

  netsim::SimConfig config() const {
    netsim::SimConfig c;
    c.mode = netsim::parse_mode(mode);
    c.worker_count = workers;
    c.latency.base_ms = latency_ms;
    c.latency.jitter_ms = jitter_ms;
    c.metadata_count = metadata_count;
    c.collision_interval_s = collision_interval_s;
    c.initial_branches = branches;
    c.branch_cap = branch_cap;
    c.rng_seed = seed;
    c.group = group;
    return c;
  }
};

json to_json(const bench::SummaryRow& r) {
  return {{"system", r.system}, {"key", r.key}, {"rep", r.rep}, {"overall_s", r.overall_s},
          {"avg_bps", r.avg_bps}, {"avg_time_per_block_s", r.avg_time_per_block_s}, {"rounds", r.rounds},
          {"blocks", r.blocks}};
}

json to_json(const netsim::Summary& s) {
  return {{"overall_s", s.overall_s}, {"avg_bps", s.avg_bps}, {"avg_time_per_block_s", s.avg_time_per_block_s},
          {"rounds", s.rounds}, {"blocks", s.blocks}};
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error(ErrorKind::kIo, "cannot write " + path.string());
}

fs::path out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

// Problems the run itself cannot throw on, checked after the fact.
std::vector<std::string> report_violations(const std::string& what, const netsim::SimReport& r) {
  std::vector<std::string> v;
  if (!r.ledger_valid) v.push_back(what + ": final ledger failed validation");
  if (!r.store_matches) v.push_back(what + ": reference store differs from the ledger");
  if (r.log.size() == 0 && r.ledger_blocks > 1) v.push_back(what + ": blocks without rounds");
  return v;
}

int run_simulate(const SimFlags& f, const std::string& tree_out) {
  const auto cfg = f.config();
  auto report = netsim::simulate(cfg, !tree_out.empty());
  const auto summary = report.log.summary();
  json j = to_json(summary);
  j["mode"] = netsim::to_string(cfg.mode);
  j["claimed_collisions"] = report.claimed;
  j["skipped_releases"] = report.skipped_releases;
  j["failed_rounds"] = report.failed_rounds;
  j["final_branches"] = report.final_branches;
  j["messages"] = report.messages;
  if (f.out.empty()) {
    std::cout << report.log.to_csv();
  } else {
    const auto dir = out_dir(f.out);
    write_file(dir / "metrics.csv", report.log.to_csv());
    write_file(dir / "summary.json", j.dump(2) + "\n");
  }
  if (!tree_out.empty()) write_file(tree_out, report.tree_text);
  std::cerr << j.dump() << '\n';
  auto violations = report_violations("simulation", report);
  for (const auto& v : violations) std::cerr << "invariant violated: " << v << '\n';
  return violations.empty() ? kOk : kViolation;
}

int run_dimension(bench::Dimension d, const SimFlags& f, const std::vector<double>& sweep, unsigned reps,
                  unsigned threads, std::size_t elections) {
  bench::ExperimentSpec spec;
  spec.dimension = d;
  spec.sweep = sweep;
  spec.repetitions = reps;
  spec.seed = f.seed;
  spec.base = f.config();
  spec.threads = threads;
  spec.elections = elections;
  auto result = bench::run_experiment(spec);

  std::vector<std::string> violations;
  json rows = json::array();
  for (const auto& p : result.points) {
    rows.push_back(to_json(p.row));
    std::ostringstream what;
    what << p.row.system << '(' << p.row.key << ") rep " << p.row.rep;
    for (auto& v : report_violations(what.str(), p.report)) violations.push_back(std::move(v));
  }
  json j{{"dimension", bench::to_string(d)}, {"rows", rows}};
  if (!result.fairness.empty()) {
    json fair = json::array();
    for (const auto& fr : result.fairness) {
      fair.push_back({{"system", fr.system}, {"key", fr.key}, {"stakes", fr.stakes}, {"wins", fr.wins},
                      {"chi_square", fr.fit.statistic}, {"p_value", fr.fit.p_value}});
    }
    j["fairness"] = fair;
  }

  std::cout << result.summary_csv();
  if (!result.fairness.empty()) std::cout << result.fairness_csv();
  if (!f.out.empty()) {
    const auto dir = out_dir(f.out);
    write_file(dir / "summary.csv", result.summary_csv());
    write_file(dir / "summary.json", j.dump(2) + "\n");
    if (!result.fairness.empty()) write_file(dir / "fairness.csv", result.fairness_csv());
    for (const auto& p : result.points) {
      std::ostringstream name;
      name << "metrics-" << p.row.system << '-' << p.row.key << '-' << p.row.rep << ".csv";
      write_file(dir / name.str(), p.metrics_csv);
    }
  }
  for (const auto& v : violations) std::cerr << "invariant violated: " << v << '\n';
  return violations.empty() ? kOk : kViolation;
}

int run_bench(std::size_t iterations, const std::string& group, std::uint64_t seed, const std::string& out) {
  auto table = bench::bench_micro(iterations, group, seed);
  std::cout << table.to_csv();
  if (!out.empty()) write_file(out_dir(out) / "micro.csv", table.to_csv());
  return kOk;
}

int run_validate(const std::string& path) {
  auto t = tree::import_file(path);
  auto report = t.validate_tree();
  for (const auto& finding : report.findings) {
    std::cout << to_string(finding.kind) << ' ' << tree::to_string(finding.where) << ": " << finding.detail << '\n';
  }
  std::cout << (report.ok() ? "ok" : "invalid") << ": " << t.branch_count() << " branches, " << t.block_count()
            << " blocks, " << report.findings.size() << " findings\n";
  return report.ok() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MedBlockTree simulator and benchmark harness"};
  app.require_subcommand(1);

  SimFlags sim_flags;
  std::vector<double> sweep;
  unsigned reps = 1;
  unsigned threads = 1;
  std::size_t elections = 10000;

  std::array<std::pair<const char*, bench::Dimension>, 5> dims{{{"d1", bench::Dimension::kBranches},
                                                               {"d2", bench::Dimension::kLatency},
                                                               {"d3", bench::Dimension::kNodes},
                                                               {"d4", bench::Dimension::kCollisionRate},
                                                               {"d5", bench::Dimension::kFairness}}};
  std::map<CLI::App*, bench::Dimension> dim_of;
  for (const auto& [name, dim] : dims) {
    auto* sub = app.add_subcommand(name, std::string("Sweep ") + bench::to_string(dim));
    sim_flags.add_to(*sub);
    sub->add_option("--sweep", sweep, "Override the sweep values");
    sub->add_option("--repetitions", reps, "Runs per sweep point")->check(CLI::PositiveNumber);
    sub->add_option("--threads", threads, "Parallel simulations")->check(CLI::PositiveNumber);
    if (dim == bench::Dimension::kFairness) {
      sub->add_option("--elections", elections, "Elections per configuration")->check(CLI::PositiveNumber);
    }
    dim_of[sub] = dim;
  }

  auto* simulate = app.add_subcommand("simulate", "Single run; metrics CSV to stdout or --out");
  sim_flags.add_to(*simulate);
  std::string tree_out;
  simulate->add_option("--export-tree", tree_out, "Write the final tree in text form");

  auto* bench_cmd = app.add_subcommand("bench", "Host micro benchmarks");
  std::size_t iterations = 10000;
  std::string bench_group = "test512";
  std::string bench_out;
  std::uint64_t bench_seed = 1;
  bench_cmd->add_option("--iterations", iterations, "Iterations per operation");
  bench_cmd->add_option("--group", bench_group, "Group profile");
  bench_cmd->add_option("--seed", bench_seed, "RNG seed");
  bench_cmd->add_option("--out", bench_out, "Output directory");

  auto* validate = app.add_subcommand("validate", "Validate an exported tree file");
  std::string tree_file;
  validate->add_option("file", tree_file, "Tree text file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (bench_cmd->parsed()) return run_bench(iterations, bench_group, bench_seed, bench_out);
    if (validate->parsed()) return run_validate(tree_file);
    if (simulate->parsed()) return run_simulate(sim_flags, tree_out);
    for (const auto& [sub, dim] : dim_of) {
      if (sub->parsed()) return run_dimension(dim, sim_flags, sweep, reps, threads, elections);
    }
  } catch (const Error& e) {
    std::cerr << "mbt: " << e.what() << '\n';
    const bool violation = e.kind() == ErrorKind::kConflict || e.kind() == ErrorKind::kRejected ||
                           e.kind() == ErrorKind::kCrypto;
    return violation ? kViolation : kUsage;
  } catch (const std::exception& e) {
    std::cerr << "mbt: " << e.what() << '\n';
    return kViolation;
  }
  return kUsage;
}
