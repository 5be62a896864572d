#pragma once

#include <memory>

#include "mbt/crypto/group.hpp"

namespace mbt::crypto {

// (pk, sk) with pk = g^sk. Issued to every participant: patients, doctors,
// workers and the authority.
struct KeyPair {
  Scalar sk;
  Element pk;
};

inline KeyPair keypair_from_secret(const GroupParams& params, const Scalar& sk) {
  if (!params.is_scalar(sk) || sgn(sk.value) == 0) {
    throw Error(ErrorKind::kParameter, "secret key must lie in [1, q-1]");
  }
  return {sk, params.pow_g(sk)};
}

inline KeyPair keygen(const GroupParams& params, Drbg& rng) {
  return keypair_from_secret(params, params.random_nonzero_scalar(rng));
}

inline KeyPair keygen(const GroupParams& params, ByteView seed) {
  Drbg rng(seed);
  return keygen(params, rng);
}

// A public key with an optional fixed-base table. Verifiers that see the same
// key many times (votes, VRF proofs from workers) prepare it once.
class PublicKey {
 public:
  PublicKey(const Element& pk) : value_(pk) {}  // NOLINT: implicit by intent
  PublicKey(const GroupParams& params, const Element& pk)
      : value_(pk), table_(params.is_member(pk) ? params.make_table(pk, 8) : nullptr) {}

  const Element& value() const { return value_; }

  Element pow(const GroupParams& params, const Scalar& e) const {
    if (table_) return {table_->pow(params.scalar(e.value).value)};
    return params.pow(value_, e);
  }

 private:
  Element value_;
  std::shared_ptr<const FixedBaseTable> table_;
};

}  // namespace mbt::crypto
