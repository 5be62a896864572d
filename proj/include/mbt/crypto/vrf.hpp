#pragma once

#include "mbt/crypto/schnorr.hpp"

namespace mbt::crypto {

/// VRF output y with its proof pi. pi is a deterministic signature over the
/// input; y = SHA-256(domain || encode(pi)).
struct VrfOutput {
  Digest256 y{};
  Signature pi;

  friend bool operator==(const VrfOutput&, const VrfOutput&) = default;
};

inline constexpr std::string_view kVrfProofDomain = "MBT/vrf-proof/v1";
inline constexpr std::string_view kVrfOutputDomain = "MBT/vrf-output/v1";

inline Digest256 vrf_output_of(const GroupParams& params, const Signature& pi) {
  return Sha256().update(kVrfOutputDomain).update(encode(params, pi)).finish();
}

inline VrfOutput vrf_prove(const GroupParams& params, const KeyPair& kp, ByteView input) {
  Signature pi = sign(params, kp, kVrfProofDomain, input);
  return {vrf_output_of(params, pi), pi};
}

inline bool vrf_verify(const GroupParams& params, const PublicKey& pk, ByteView input,
                       const VrfOutput& out) {
  if (!verify_signature(params, pk, kVrfProofDomain, input, out.pi)) return false;
  return vrf_output_of(params, out.pi) == out.y;
}

// y || c || s
inline Bytes encode(const GroupParams& params, const VrfOutput& out) {
  return Writer().raw(out.y).raw(encode(params, out.pi)).bytes();
}

inline VrfOutput decode_vrf(const GroupParams& params, ByteView data) {
  if (data.size() != 32 + 2 * params.scalar_bytes()) throw Error(ErrorKind::kFormat, "vrf width");
  VrfOutput out;
  std::copy_n(data.begin(), 32, out.y.begin());
  out.pi = decode_signature(params, data.subspan(32));
  return out;
}

}  // namespace mbt::crypto
