#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include "mbt/crypto/sha256.hpp"

namespace mbt::crypto {

// Deterministic byte stream: SHA-256 in counter mode over a seed-derived key.
// Every source of "entropy" in the library is one of these, so a run is a pure
// function of its seed on every platform.
class Drbg {
 public:
  explicit Drbg(ByteView seed) : key_(Sha256().update("MBT/drbg/v1").update(seed).finish()) {}

  explicit Drbg(std::uint64_t seed) : Drbg(Writer().u64(seed).bytes()) {}

  // Independent child stream; the parent is not advanced.
  Drbg fork(std::string_view label) const {
    return Drbg(Writer().raw(key_).raw(label).bytes());
  }
  Drbg fork(std::string_view label, std::uint64_t index) const {
    return Drbg(Writer().raw(key_).raw(label).u64(index).bytes());
  }

  void fill(std::span<std::uint8_t> out) {
    for (auto& b : out) {
      if (used_ == block_.size()) refill();
      b = block_[used_++];
    }
  }

  Bytes bytes(std::size_t n) {
    Bytes out(n);
    fill(out);
    return out;
  }

  std::uint64_t next_u64() {
    std::uint8_t buf[8];
    fill(buf);
    std::uint64_t v = 0;
    for (auto b : buf) v = (v << 8) | b;
    return v;
  }

  // Uniform in [0, bound) by rejection; bound must be non-zero.
  std::uint64_t uniform(std::uint64_t bound) {
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    for (;;) {
      auto v = next_u64();
      if (v < limit) return v % bound;
    }
  }

 private:
  void refill() {
    block_ = Sha256().update(key_).update(Writer().u64(counter_++).bytes()).finish();
    used_ = 0;
  }

  Digest256 key_;
  Digest256 block_{};
  std::size_t used_ = block_.size();
  std::uint64_t counter_ = 0;
};

}  // namespace mbt::crypto
