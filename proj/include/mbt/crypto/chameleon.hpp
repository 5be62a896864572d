#pragma once

#include "mbt/crypto/keys.hpp"

namespace mbt::crypto {

/// Chameleon hash value h together with its check string zeta.
struct ChameleonDigest {
  Element h;
  Scalar zeta;

  friend bool operator==(const ChameleonDigest&, const ChameleonDigest&) = default;
};

inline constexpr std::string_view kChameleonDomain = "MBT/chameleon/v1";

// H(pk, m): the message is bound to its owner's key, so a digest is only
// meaningful under the identity that produced it.
inline Scalar message_scalar(const GroupParams& params, const Element& pk, ByteView message) {
  return params.hash_to_scalar(kChameleonDomain, Writer().raw(params.encode(pk)).raw(message).bytes());
}

// h = g^e * pk^zeta mod p
inline Element chameleon_value(const GroupParams& params, const PublicKey& pk, const Scalar& e,
                               const Scalar& zeta) {
  return params.mul(params.pow_g(e), pk.pow(params, zeta));
}

inline ChameleonDigest chamhash_with_zeta(const GroupParams& params, const PublicKey& pk,
                                          ByteView message, const Scalar& zeta) {
  if (!params.is_member(pk.value())) {
    throw Error(ErrorKind::kParameter, "public key is not in the order-q subgroup");
  }
  if (!params.is_scalar(zeta)) throw Error(ErrorKind::kParameter, "check string out of range");
  return {chameleon_value(params, pk, message_scalar(params, pk.value(), message), zeta), zeta};
}

inline ChameleonDigest chamhash(const GroupParams& params, const PublicKey& pk, ByteView message,
                                Drbg& rng) {
  return chamhash_with_zeta(params, pk, message, params.random_scalar(rng));
}

inline bool verify(const GroupParams& params, const PublicKey& pk, ByteView message,
                   const ChameleonDigest& digest) {
  if (!params.is_member(pk.value()) || !params.is_member(digest.h) || !params.is_scalar(digest.zeta)) {
    return false;
  }
  return chameleon_value(params, pk, message_scalar(params, pk.value(), message), digest.zeta) ==
         digest.h;
}

// Trapdoor-side check: h = g^(H(m) + sk*zeta). One fixed-base exponentiation.
inline bool verify_with_trapdoor(const GroupParams& params, const KeyPair& kp, ByteView message,
                                 const ChameleonDigest& digest) {
  if (!params.is_member(digest.h) || !params.is_scalar(digest.zeta)) return false;
  Scalar exponent = params.scalar(message_scalar(params, kp.pk, message).value + kp.sk.value * digest.zeta.value);
  return params.pow_g(exponent) == digest.h;
}

// zeta' = (H(m) - H(m')) * sk^-1 + zeta mod q; h is unchanged.
inline ChameleonDigest find_collision(const GroupParams& params, const KeyPair& kp,
                                      ByteView old_message, ByteView new_message,
                                      const ChameleonDigest& digest) {
  if (sgn(kp.sk.value) == 0) throw Error(ErrorKind::kParameter, "zero trapdoor");
  if (!verify_with_trapdoor(params, kp, old_message, digest)) {
    throw Error(ErrorKind::kInvalidSource, "source digest does not verify under the trapdoor key");
  }
  const Scalar old_e = message_scalar(params, kp.pk, old_message);
  const Scalar new_e = message_scalar(params, kp.pk, new_message);
  const Scalar inv = params.inverse(kp.sk);
  return {digest.h, params.scalar((old_e.value - new_e.value) * inv.value + digest.zeta.value)};
}

inline Bytes encode(const GroupParams& params, const ChameleonDigest& d) {
  return Writer().raw(params.encode(d.h)).raw(params.encode(d.zeta)).bytes();
}

}  // namespace mbt::crypto
