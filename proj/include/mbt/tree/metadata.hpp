#pragma once

#include <cstdint>
#include <string>

#include "mbt/crypto/group.hpp"

namespace mbt::tree {

using crypto::Element;

/// One EMR metadata record awaiting commitment. Its canonical encoding is the
/// chameleon-hash message of the block that carries it.
struct MetadataPack {
  Element patient_pk;
  Element doctor_pk;
  std::uint64_t timestamp_ms = 0;
  std::string keywords;
  std::uint64_t meta_id = 0;

  friend bool operator==(const MetadataPack&, const MetadataPack&) = default;
};

// Length-prefixed fields in declaration order:
//   u32 len | patient_pk | u32 len | doctor_pk | u32 8 | timestamp (u64)
//   u32 len | keywords   | u32 8   | meta_id (u64)
inline Bytes encode(const crypto::GroupParams& params, const MetadataPack& m) {
  return Writer()
      .prefixed(params.encode(m.patient_pk))
      .prefixed(params.encode(m.doctor_pk))
      .prefixed(Writer().u64(m.timestamp_ms).bytes())
      .prefixed(as_bytes(m.keywords))
      .prefixed(Writer().u64(m.meta_id).bytes())
      .bytes();
}

inline MetadataPack decode_metadata(const crypto::GroupParams& params, ByteView data) {
  Reader r(data);
  MetadataPack m;
  m.patient_pk = params.decode_element(r.prefixed());
  m.doctor_pk = params.decode_element(r.prefixed());
  m.timestamp_ms = Reader(r.prefixed()).u64();
  auto kw = r.prefixed();
  m.keywords.assign(kw.begin(), kw.end());
  m.meta_id = Reader(r.prefixed()).u64();
  if (!r.done()) throw Error(ErrorKind::kFormat, "trailing bytes after metadata");
  return m;
}

}  // namespace mbt::tree
