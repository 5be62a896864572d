#pragma once

#include <chrono>
#include <filesystem>
#include <sstream>

#include "mbt/store/block_store.hpp"
#include "mbt/tree/medblocktree.hpp"
#include "mbt/tree/sha_chain.hpp"

namespace mbt::bench {

struct MicroRow {
  std::string op;
  std::uint64_t iterations = 0;
  double mean_ms = 0;
};

struct MicroTable {
  std::vector<MicroRow> rows;

  double mean_ms(std::string_view op) const {
    for (const auto& r : rows) {
      if (r.op == op) return r.mean_ms;
    }
    throw Error(ErrorKind::kParameter, "no benchmark named " + std::string(op));
  }

  std::string to_csv() const {
    std::ostringstream out;
    out << "# mbt-micro v1\nop,iterations,mean_ms\n";
    for (const auto& r : rows) out << r.op << ',' << r.iterations << ',' << r.mean_ms << '\n';
    return out.str();
  }
};

namespace detail {

template <class F>
double mean_ms(std::size_t iterations, F&& op) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < iterations; ++i) op(i);
  const std::chrono::duration<double, std::milli> spent = std::chrono::steady_clock::now() - t0;
  return spent.count() / static_cast<double>(iterations);
}

}  // namespace detail

/// Host timings of block formation and storage. Inputs are prepared before
/// the clock starts so each mean covers the operation alone.
inline MicroTable bench_micro(std::size_t iterations, const std::string& group_name = "test512",
                              std::uint64_t seed = 1) {
  if (iterations < 100) throw Error(ErrorKind::kParameter, "bench_micro needs at least 100 iterations");
  auto group = crypto::profiles::by_name(group_name);
  const auto& params = *group;
  crypto::Drbg rng(seed);
  const auto authority = crypto::keygen(params, rng);
  const auto proposer = crypto::keygen(params, rng);
  const auto doctor = crypto::keygen(params, rng);

  std::vector<tree::MetadataPack> metas;
  for (std::size_t i = 0; i < iterations; ++i) {
    metas.push_back({crypto::keygen(params, rng).pk, doctor.pk, i, "bench-" + std::to_string(i), i + 1});
  }
  const Bytes randomness = rng.bytes(32);

  MicroTable table;
  auto chain = tree::ShaChain::genesis(group, authority);
  table.rows.push_back({"sha_block", iterations, detail::mean_ms(iterations, [&](std::size_t i) {
                          (void)chain.make_block(1, metas[i], proposer, randomness, rng);
                        })});

  auto t = tree::MedBlockTree::genesis(group, authority, rng);
  std::vector<tree::Block> blocks;
  blocks.reserve(iterations);
  table.rows.push_back({"chame_block", iterations, detail::mean_ms(iterations, [&](std::size_t i) {
                          blocks.push_back(t.make_block(1, metas[i], proposer, randomness, rng));
                        })});

  const auto returning = crypto::keygen(params, rng);
  if (!t.append_blockmap({{1, t.make_block(1, {returning.pk, doctor.pk, 0, "first", 0}, proposer, randomness, rng)}})
           .ok()) {
    throw Error(ErrorKind::kCrypto, "bench setup append failed");
  }
  table.rows.push_back({"colli_block", iterations, detail::mean_ms(iterations, [&](std::size_t i) {
                          (void)t.make_collision(returning, {returning.pk, doctor.pk, i, "return", i + 1});
                        })});

  const auto dir = std::filesystem::temp_directory_path() /
                   ("mbt-bench-" + std::to_string(seed) + "-" + to_hex(rng.bytes(6)));
  std::filesystem::create_directories(dir);
  {
    store::BlockStore s(std::make_unique<store::FileBackend>(dir / "blocks.mbts"));
    std::vector<Bytes> encoded;
    for (auto& b : blocks) encoded.push_back(tree::encode(params, b));
    table.rows.push_back({"store_write", iterations, detail::mean_ms(iterations, [&](std::size_t i) {
                            s.put({1, static_cast<std::uint32_t>(i + 1)}, params.encode(metas[i].patient_pk),
                                  encoded[i]);
                          })});
  }
  std::filesystem::remove_all(dir);
  return table;
}

}  // namespace mbt::bench
