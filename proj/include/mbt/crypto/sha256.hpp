#pragma once

#include <openssl/evp.h>

#include <memory>

#include "mbt/common/bytes.hpp"

namespace mbt::crypto {

// Incremental SHA-256. Backed by OpenSSL's EVP interface.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
      throw Error(ErrorKind::kCrypto, "sha256 init failed");
    }
  }

  Sha256& update(ByteView data) {
    if (!data.empty()) EVP_DigestUpdate(ctx_.get(), data.data(), data.size());
    return *this;
  }
  Sha256& update(std::string_view s) { return update(as_bytes(s)); }

  Digest256 finish() {
    Digest256 out{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_.get(), out.data(), &len);
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest256 std_hash(ByteView input) { return Sha256().update(input).finish(); }

inline Digest256 std_hash(std::string_view input) { return std_hash(as_bytes(input)); }

}  // namespace mbt::crypto
