#pragma once

#include "mbt/crypto/keys.hpp"

namespace mbt::crypto {

// Deterministic Schnorr signature (c, s): k = H(sk, m), R = g^k,
// c = H(pk, R, m), s = k + c*sk. Used directly for votes and as the proof
// inside the VRF.
struct Signature {
  Scalar c;
  Scalar s;

  friend bool operator==(const Signature&, const Signature&) = default;
};

inline constexpr std::string_view kNonceDomain = "MBT/schnorr-nonce/v1";
inline constexpr std::string_view kChallengeDomain = "MBT/schnorr-challenge/v1";

namespace detail {

inline Scalar challenge(const GroupParams& params, const Element& pk, const Element& r,
                        std::string_view domain, ByteView message) {
  return params.hash_to_scalar(kChallengeDomain, Writer()
                                                     .raw(params.encode(pk))
                                                     .raw(params.encode(r))
                                                     .prefixed(as_bytes(domain))
                                                     .raw(message)
                                                     .bytes());
}

}  // namespace detail

inline Signature sign(const GroupParams& params, const KeyPair& kp, std::string_view domain,
                      ByteView message) {
  Scalar k = params.hash_to_scalar(
      kNonceDomain, Writer().raw(params.encode(kp.sk)).prefixed(as_bytes(domain)).raw(message).bytes());
  if (sgn(k.value) == 0) k.value = 1;
  const Element r = params.pow_g(k);
  const Scalar c = detail::challenge(params, kp.pk, r, domain, message);
  return {c, params.scalar(k.value + c.value * kp.sk.value)};
}

inline bool verify_signature(const GroupParams& params, const PublicKey& pk, std::string_view domain,
                             ByteView message, const Signature& sig) {
  if (!params.is_member(pk.value()) || !params.is_scalar(sig.c) || !params.is_scalar(sig.s)) {
    return false;
  }
  // R' = g^s * pk^(q - c) = g^s * pk^(-c)
  const Element r = params.mul(params.pow_g(sig.s), pk.pow(params, params.scalar(params.q() - sig.c.value)));
  return detail::challenge(params, pk.value(), r, domain, message) == sig.c;
}

inline Bytes encode(const GroupParams& params, const Signature& sig) {
  return Writer().raw(params.encode(sig.c)).raw(params.encode(sig.s)).bytes();
}

inline Signature decode_signature(const GroupParams& params, ByteView data) {
  if (data.size() != 2 * params.scalar_bytes()) throw Error(ErrorKind::kFormat, "signature width");
  return {params.decode_scalar(data.first(params.scalar_bytes())),
          params.decode_scalar(data.subspan(params.scalar_bytes()))};
}

}  // namespace mbt::crypto
