#pragma once

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "mbt/consensus/election.hpp"
#include "mbt/common/sim_time.hpp"

namespace mbt::netsim {

struct RoundRecord {
  std::uint64_t round = 0;
  SimTime self{};
  SimTime net{};
  SimTime db{};
  std::size_t blocks = 0;    // appended plus claimed collision blocks
  std::size_t branches = 0;  // after the round
  bool committed = true;
  consensus::WinnersMap winners;

  SimTime duration() const { return self + net + db; }
};

struct Summary {
  double overall_s = 0;
  double avg_bps = 0;
  double avg_time_per_block_s = 0;
  std::uint64_t rounds = 0;
  std::uint64_t blocks = 0;
};

// Microseconds as milliseconds with exactly three decimals.
inline std::string format_ms(SimTime t) {
  const auto us = t.count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%lld.%03lld", us < 0 ? "-" : "", static_cast<long long>(std::llabs(us) / 1000),
                static_cast<long long>(std::llabs(us) % 1000));
  return buf;
}

inline SimTime parse_ms(const std::string& s) {
  const auto dot = s.find('.');
  const bool neg = !s.empty() && s[0] == '-';
  const std::string whole = s.substr(neg ? 1 : 0, dot == std::string::npos ? std::string::npos : dot - (neg ? 1 : 0));
  std::string frac = dot == std::string::npos ? "" : s.substr(dot + 1);
  if (frac.size() > 3) throw Error(ErrorKind::kFormat, "sub-microsecond duration: " + s);
  frac.resize(3, '0');
  const long long us = std::stoll(whole.empty() ? "0" : whole) * 1000 + std::stoll(frac);
  return SimTime(neg ? -us : us);
}

inline std::string format_winners(const consensus::WinnersMap& w) {
  std::string out;
  for (const auto& [branch, worker] : w) {
    if (!out.empty()) out += '|';
    out += "B" + std::to_string(branch) + ":W" + std::to_string(worker);
  }
  return out;
}

/// Append-only per-round log.
class MetricsLog {
 public:
  static constexpr std::string_view kSchema = "# mbt-metrics v1";
  static constexpr std::string_view kHeader = "round,phase_self_ms,phase_net_ms,phase_db_ms,blocks,branches,winner_list";

  void append(RoundRecord r) {
    if (r.self.count() < 0 || r.net.count() < 0 || r.db.count() < 0) {
      throw Error(ErrorKind::kParameter, "negative phase duration");
    }
    records_.push_back(std::move(r));
  }

  const std::vector<RoundRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  SimTime elapsed() const {
    SimTime t{};
    for (const auto& r : records_) t += r.duration();
    return t;
  }

  std::uint64_t total_blocks() const {
    std::uint64_t n = 0;
    for (const auto& r : records_) n += r.blocks;
    return n;
  }

  Summary summary() const {
    Summary s;
    s.rounds = records_.size();
    s.blocks = total_blocks();
    s.overall_s = to_seconds(elapsed());
    if (s.blocks > 0 && s.overall_s > 0) {
      s.avg_bps = static_cast<double>(s.blocks) / s.overall_s;
      s.avg_time_per_block_s = s.overall_s / static_cast<double>(s.blocks);
    }
    return s;
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << kSchema << '\n' << kHeader << '\n';
    for (const auto& r : records_) {
      out << r.round << ',' << format_ms(r.self) << ',' << format_ms(r.net) << ',' << format_ms(r.db) << ','
          << r.blocks << ',' << r.branches << ',' << format_winners(r.winners) << '\n';
    }
    return out.str();
  }

 private:
  std::vector<RoundRecord> records_;
};

}  // namespace mbt::netsim
