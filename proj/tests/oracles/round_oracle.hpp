#pragma once

// Replays pool drain from a metrics CSV: each round appends
// min(branches, remaining) packs, then claims the returns that became ready
// by the end of consensus. Only the CSV's phase durations are trusted; block
// counts, branch counts and the round total are recomputed.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

struct DrainParams {
  std::uint64_t metadata_count = 0;
  std::uint64_t initial_branches = 1;
  double interval_s = 0;  // 0: no returns
  double colli_ms = 27;
  std::optional<std::uint64_t> branch_cap;
  double block_ms = 62;
  double db_ms = 11;
  std::uint64_t cores = 2;
};

struct CsvRow {
  std::uint64_t round = 0;
  std::int64_t self_us = 0, net_us = 0, db_us = 0;
  std::uint64_t blocks = 0, branches = 0;
  std::vector<std::uint64_t> winners;  // in branch order
};

inline std::int64_t ms_to_us(const std::string& s) {
  const auto dot = s.find('.');
  std::int64_t whole = std::stoll(s.substr(0, dot));
  std::int64_t frac = 0;
  if (dot != std::string::npos) {
    std::string f = s.substr(dot + 1);
    f.resize(3, '0');
    frac = std::stoll(f);
  }
  return whole * 1000 + frac;
}

inline std::vector<CsvRow> parse_metrics(const std::string& csv) {
  std::vector<CsvRow> rows;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("round,", 0) == 0) continue;
    std::vector<std::string> f;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
    if (f.size() == 6) f.emplace_back();
    if (f.size() != 7) throw std::runtime_error("bad metrics row: " + line);
    CsvRow r;
    r.round = std::stoull(f[0]);
    r.self_us = ms_to_us(f[1]);
    r.net_us = ms_to_us(f[2]);
    r.db_us = ms_to_us(f[3]);
    r.blocks = std::stoull(f[4]);
    r.branches = std::stoull(f[5]);
    std::map<std::uint64_t, std::uint64_t> by_branch;
    std::stringstream ws(f[6]);
    for (std::string item; std::getline(ws, item, '|');) {
      const auto colon = item.find(":W");
      by_branch[std::stoull(item.substr(1, colon - 1))] = std::stoull(item.substr(colon + 2));
    }
    for (const auto& [_, w] : by_branch) r.winners.push_back(w);
    rows.push_back(std::move(r));
  }
  return rows;
}

struct DrainResult {
  std::uint64_t rounds = 0;
  std::uint64_t blocks = 0;
  std::uint64_t claims = 0;
  std::string mismatch;  // first disagreement with the CSV, empty if none
};

inline DrainResult replay_drain(const DrainParams& p, const std::string& csv) {
  const auto rows = parse_metrics(csv);
  DrainResult out;
  std::uint64_t remaining = p.metadata_count;
  std::uint64_t branches = p.initial_branches;
  std::uint64_t committed_before = 0;  // patients eligible to return
  std::uint64_t tick = 1;
  std::int64_t now_us = 0;
  const auto interval_us = static_cast<std::int64_t>(p.interval_s * 1e6 + 0.5);
  const auto colli_us = static_cast<std::int64_t>(p.colli_ms * 1000 + 0.5);
  auto fail = [&](std::uint64_t r, const std::string& what) {
    if (out.mismatch.empty()) out.mismatch = "round " + std::to_string(r) + ": " + what;
  };

  std::size_t i = 0;
  for (; remaining > 0; ++i) {
    if (i >= rows.size()) {
      fail(i + 1, "log ends with " + std::to_string(remaining) + " packs left");
      break;
    }
    const auto& row = rows[i];
    const std::uint64_t appended = std::min(branches, remaining);

    std::map<std::uint64_t, std::uint64_t> won;
    for (std::uint64_t b = 0; b < appended && b < row.winners.size(); ++b) ++won[row.winners[b]];
    std::uint64_t most = 0;
    for (const auto& [_, n] : won) most = std::max(most, n);
    const auto self_us = static_cast<std::int64_t>((most + p.cores - 1) / p.cores * p.block_ms * 1000 + 0.5);
    if (row.self_us != self_us) fail(row.round, "self phase " + std::to_string(row.self_us) + "us");

    const std::int64_t consensus_us = now_us + row.self_us + row.net_us;
    std::uint64_t claims = 0;
    if (interval_us > 0) {
      for (; static_cast<std::int64_t>(tick) * interval_us + colli_us <= consensus_us; ++tick) {
        const bool capped = p.branch_cap && branches + claims >= *p.branch_cap;
        if (!capped && claims < committed_before) ++claims;
      }
    }
    remaining -= appended;
    committed_before += appended;
    branches += claims;
    out.claims += claims;
    out.blocks += appended + claims;
    now_us = consensus_us + row.db_us;

    if (row.round != i + 1) fail(row.round, "round numbering");
    if (row.blocks != appended + claims) fail(row.round, "blocks " + std::to_string(row.blocks));
    if (row.branches != branches) fail(row.round, "branches " + std::to_string(row.branches));
    const auto db_us = static_cast<std::int64_t>((appended + claims) * p.db_ms * 1000 + 0.5);
    if (row.db_us != db_us) fail(row.round, "db phase " + std::to_string(row.db_us) + "us");
  }
  out.rounds = i;
  if (rows.size() != out.rounds) fail(out.rounds, "log has " + std::to_string(rows.size()) + " rounds");
  return out;
}

}  // namespace oracle
