#pragma once

#include <cstring>
#include <unordered_map>

#include "mbt/common/bytes.hpp"

namespace mbt::consensus {

/// Memo for pure verification results (signatures, VRF proofs, block
/// digests), keyed by a hash of everything the check reads. Shared by the
/// workers of one simulated cluster so each distinct message is verified
/// once; the answer is the same for every worker.
class VerifyCache {
 public:
  template <class F>
  bool check(const Digest256& key, F&& compute) {
    auto it = memo_.find(key);
    if (it != memo_.end()) {
      ++hits_;
      return it->second;
    }
    const bool ok = compute();
    memo_.emplace(key, ok);
    return ok;
  }

  void clear() { memo_.clear(); }
  std::size_t size() const { return memo_.size(); }
  std::uint64_t hits() const { return hits_; }

 private:
  struct KeyHash {
    std::size_t operator()(const Digest256& d) const {
      std::size_t h;
      std::memcpy(&h, d.data(), sizeof h);
      return h;
    }
  };
  std::unordered_map<Digest256, bool, KeyHash> memo_;
  std::uint64_t hits_ = 0;
};

}  // namespace mbt::consensus
