#pragma once

#include <gmpxx.h>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "mbt/common/bytes.hpp"
#include "mbt/crypto/drbg.hpp"
#include "mbt/crypto/sha256.hpp"

namespace mbt::crypto {

/// Exponent modulo q.
struct Scalar {
  mpz_class value;

  friend bool operator==(const Scalar& a, const Scalar& b) { return cmp(a.value, b.value) == 0; }
  friend bool operator<(const Scalar& a, const Scalar& b) { return cmp(a.value, b.value) < 0; }
};

/// Residue modulo p. Group members live in the order-q subgroup; the value 0
/// is used only as the "no predecessor" sentinel.
struct Element {
  mpz_class value;

  friend bool operator==(const Element& a, const Element& b) { return cmp(a.value, b.value) == 0; }
  friend bool operator<(const Element& a, const Element& b) { return cmp(a.value, b.value) < 0; }
};

namespace detail {

inline Bytes export_fixed(const mpz_class& v, std::size_t width) {
  Bytes out(width, 0);
  if (sgn(v) == 0) return out;
  std::size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  if (count > width) throw Error(ErrorKind::kFormat, "integer wider than its encoding");
  mpz_export(out.data() + (width - count), &count, 1, 1, 1, 0, v.get_mpz_t());
  return out;
}

inline mpz_class import_bytes(ByteView data) {
  mpz_class v;
  if (!data.empty()) mpz_import(v.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  return v;
}

}  // namespace detail

// Precomputed powers base^(d * 2^(w*i)) so that an exponentiation costs one
// modular multiplication per w-bit window instead of a full square-and-multiply.
class FixedBaseTable {
 public:
  FixedBaseTable(const mpz_class& base, const mpz_class& modulus, std::size_t exponent_bits,
                 unsigned window_bits = 8)
      : modulus_(modulus), window_(window_bits) {
    if (window_ != 4 && window_ != 8) throw Error(ErrorKind::kParameter, "window must be 4 or 8");
    windows_ = (exponent_bits + window_ - 1) / window_;
    const std::size_t row = std::size_t{1} << window_;
    table_.resize(windows_ * row);
    mpz_class step = base % modulus_;
    for (std::size_t i = 0; i < windows_; ++i) {
      mpz_class* r = &table_[i * row];
      r[0] = 1;
      for (std::size_t d = 1; d < row; ++d) {
        mpz_mul(r[d].get_mpz_t(), r[d - 1].get_mpz_t(), step.get_mpz_t());
        mpz_mod(r[d].get_mpz_t(), r[d].get_mpz_t(), modulus_.get_mpz_t());
      }
      // next window base = step^(2^w) = r[row-1] * step
      mpz_mul(step.get_mpz_t(), r[row - 1].get_mpz_t(), step.get_mpz_t());
      mpz_mod(step.get_mpz_t(), step.get_mpz_t(), modulus_.get_mpz_t());
    }
  }

  // e must be non-negative and below 2^exponent_bits.
  mpz_class pow(const mpz_class& e) const {
    const std::size_t bytes = (windows_ * window_ + 7) / 8;
    std::vector<std::uint8_t> le(bytes, 0);
    std::size_t count = 0;
    if (sgn(e) != 0) {
      if ((mpz_sizeinbase(e.get_mpz_t(), 2) + 7) / 8 > bytes) {
        throw Error(ErrorKind::kParameter, "exponent exceeds table range");
      }
      mpz_export(le.data(), &count, -1, 1, 0, 0, e.get_mpz_t());
    }
    const std::size_t row = std::size_t{1} << window_;
    mpz_class acc = 1;
    for (std::size_t i = 0; i < windows_; ++i) {
      unsigned digit = (window_ == 8) ? le[i] : ((le[i / 2] >> ((i % 2) * 4)) & 0x0f);
      if (digit == 0) continue;
      mpz_mul(acc.get_mpz_t(), acc.get_mpz_t(), table_[i * row + digit].get_mpz_t());
      mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), modulus_.get_mpz_t());
    }
    return acc;
  }

 private:
  mpz_class modulus_;
  unsigned window_;
  std::size_t windows_ = 0;
  std::vector<mpz_class> table_;
};

/// Safe-prime group: p = 2q + 1 with q prime, g of order q.
class GroupParams {
 public:
  static std::shared_ptr<const GroupParams> create(const mpz_class& p, const mpz_class& q,
                                                   const mpz_class& g, std::string name) {
    if (p <= 3 || q <= 1 || p != 2 * q + 1) {
      throw Error(ErrorKind::kParameter, "p must equal 2q+1");
    }
    if (mpz_probab_prime_p(q.get_mpz_t(), 30) == 0 || mpz_probab_prime_p(p.get_mpz_t(), 30) == 0) {
      throw Error(ErrorKind::kParameter, "p and q must be prime");
    }
    if (g <= 1 || g >= p) throw Error(ErrorKind::kParameter, "generator out of range");
    mpz_class check;
    mpz_powm(check.get_mpz_t(), g.get_mpz_t(), q.get_mpz_t(), p.get_mpz_t());
    if (check != 1) throw Error(ErrorKind::kParameter, "generator does not have order q");
    return std::shared_ptr<const GroupParams>(new GroupParams(p, q, g, std::move(name)));
  }

  const std::string& name() const { return name_; }
  const mpz_class& p() const { return p_; }
  const mpz_class& q() const { return q_; }
  const Element& g() const { return g_; }
  std::size_t element_bytes() const { return element_bytes_; }
  std::size_t scalar_bytes() const { return scalar_bytes_; }
  std::size_t p_bits() const { return mpz_sizeinbase(p_.get_mpz_t(), 2); }

  Element pow_g(const Scalar& e) const { return {g_table_->pow(reduce(e.value))}; }

  Element pow(const Element& base, const Scalar& e) const {
    Element out;
    mpz_class r = reduce(e.value);
    mpz_powm(out.value.get_mpz_t(), base.value.get_mpz_t(), r.get_mpz_t(), p_.get_mpz_t());
    return out;
  }

  Element mul(const Element& a, const Element& b) const {
    Element out;
    mpz_mul(out.value.get_mpz_t(), a.value.get_mpz_t(), b.value.get_mpz_t());
    mpz_mod(out.value.get_mpz_t(), out.value.get_mpz_t(), p_.get_mpz_t());
    return out;
  }

  // Quadratic residues mod a safe prime are exactly the order-q subgroup, so
  // the Jacobi symbol decides membership without an exponentiation.
  bool is_member(const Element& x) const {
    if (x.value <= 0 || x.value >= p_) return false;
    return mpz_jacobi(x.value.get_mpz_t(), p_.get_mpz_t()) == 1;
  }

  bool is_scalar(const Scalar& s) const { return s.value >= 0 && s.value < q_; }

  Scalar scalar(const mpz_class& v) const { return {reduce(v)}; }

  Bytes encode(const Scalar& s) const { return detail::export_fixed(s.value, scalar_bytes_); }
  Bytes encode(const Element& x) const { return detail::export_fixed(x.value, element_bytes_); }

  Scalar decode_scalar(ByteView data) const {
    if (data.size() != scalar_bytes_) throw Error(ErrorKind::kFormat, "scalar width mismatch");
    Scalar s{detail::import_bytes(data)};
    if (!is_scalar(s)) throw Error(ErrorKind::kFormat, "scalar out of range");
    return s;
  }
  Element decode_element(ByteView data) const {
    if (data.size() != element_bytes_) throw Error(ErrorKind::kFormat, "element width mismatch");
    Element x{detail::import_bytes(data)};
    if (x.value >= p_) throw Error(ErrorKind::kFormat, "element out of range");
    return x;
  }

  // Domain-separated SHA-256 reduced mod q. The output is widened by running
  // SHA-256 in counter mode until it covers q plus 128 bits, so the reduction
  // is unbiased for every profile (nonces in particular must not be short).
  Scalar hash_to_scalar(std::string_view domain, ByteView data) const {
    Bytes wide;
    for (std::uint32_t block = 0; wide.size() < scalar_bytes_ + 16; ++block) {
      auto d = Sha256()
                   .update(Writer().u32(block).u32(static_cast<std::uint32_t>(domain.size())).bytes())
                   .update(domain)
                   .update(data)
                   .finish();
      wide.insert(wide.end(), d.begin(), d.end());
    }
    return {reduce(detail::import_bytes(wide))};
  }

  Scalar random_scalar(Drbg& rng) const {
    auto wide = rng.bytes(scalar_bytes_ + 16);
    return {reduce(detail::import_bytes(wide))};
  }

  // Uniform in [1, q-1].
  Scalar random_nonzero_scalar(Drbg& rng) const {
    auto wide = rng.bytes(scalar_bytes_ + 16);
    mpz_class v = detail::import_bytes(wide);
    mpz_class qm1 = q_ - 1;
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), qm1.get_mpz_t());
    return {v + 1};
  }

  Scalar inverse(const Scalar& s) const {
    mpz_class inv;
    if (mpz_invert(inv.get_mpz_t(), s.value.get_mpz_t(), q_.get_mpz_t()) == 0) {
      throw Error(ErrorKind::kParameter, "scalar has no inverse mod q");
    }
    return {inv};
  }

  // Precomputation for a base that is reused many times (worker keys).
  std::shared_ptr<const FixedBaseTable> make_table(const Element& base, unsigned window = 4) const {
    return std::make_shared<const FixedBaseTable>(base.value, p_, mpz_sizeinbase(q_.get_mpz_t(), 2),
                                                  window);
  }

 private:
  GroupParams(mpz_class p, mpz_class q, mpz_class g, std::string name)
      : name_(std::move(name)),
        p_(std::move(p)),
        q_(std::move(q)),
        g_{std::move(g)},
        element_bytes_((mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8),
        scalar_bytes_((mpz_sizeinbase(q_.get_mpz_t(), 2) + 7) / 8),
        g_table_(std::make_shared<const FixedBaseTable>(g_.value, p_,
                                                        mpz_sizeinbase(q_.get_mpz_t(), 2), 8)) {}

  mpz_class reduce(const mpz_class& v) const {
    mpz_class r;
    mpz_mod(r.get_mpz_t(), v.get_mpz_t(), q_.get_mpz_t());
    return r;
  }

  std::string name_;
  mpz_class p_;
  mpz_class q_;
  Element g_;
  std::size_t element_bytes_;
  std::size_t scalar_bytes_;
  std::shared_ptr<const FixedBaseTable> g_table_;
};

using Group = std::shared_ptr<const GroupParams>;

namespace profiles {

// p = 23, q = 11, g = 4. Hand-checkable; no security.
inline Group tiny() {
  static const Group g = GroupParams::create(23, 11, 4, "tiny");
  return g;
}

// 512-bit safe prime, fixed so runs are reproducible. Default for tests and
// simulations.
inline Group test512() {
  static const Group g = GroupParams::create(
      mpz_class("8d8ff6df80dcb49f739784293c279115bbb266c16a93e7901a7cc926970971c9"
                "bb72e96485277ceb6325e4e596918494418407205eb4b26148753de3ded70327",
                16),
      mpz_class("46c7fb6fc06e5a4fb9cbc2149e13c88addd93360b549f3c80d3e64934b84b8e4"
                "ddb974b24293be75b192f272cb48c24a20c203902f5a5930a43a9ef1ef6b8193",
                16),
      4, "test512");
  return g;
}

// RFC 3526 2048-bit MODP group 14 prime. g = 4 is a quadratic residue and
// therefore generates the order-q subgroup.
inline Group demo2048() {
  static const Group g = [] {
    mpz_class p(
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
        "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
        "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
        "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
        "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
        "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
        "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
        "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
        16);
    mpz_class q = (p - 1) / 2;
    return GroupParams::create(p, q, 4, "demo2048");
  }();
  return g;
}

inline Group by_name(std::string_view name) {
  if (name == "tiny") return tiny();
  if (name == "test512" || name == "test") return test512();
  if (name == "demo2048" || name == "demo") return demo2048();
  throw Error(ErrorKind::kParameter, "unknown group profile: " + std::string(name));
}

}  // namespace profiles

}  // namespace mbt::crypto
