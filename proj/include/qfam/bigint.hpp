#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

namespace qfam {

/// Arbitrary-precision signed integer used throughout the library.
using Int = mpz_class;
/// Exact rational.
using Rational = mpq_class;

inline Int make_int(std::int64_t v) {
  Int out;
  mpz_set_si(out.get_mpz_t(), static_cast<long>(v));
  return out;
}

inline Int make_uint(std::uint64_t v) {
  Int out;
  mpz_import(out.get_mpz_t(), 1, 1, sizeof(v), 0, 0, &v);
  return out;
}

inline std::string to_dec(const Int& v) { return v.get_str(10); }

inline bool fits_u64(const Int& v) {
  return sgn(v) >= 0 && mpz_sizeinbase(v.get_mpz_t(), 2) <= 64;
}

inline bool fits_i64(const Int& v) {
  return mpz_sizeinbase(v.get_mpz_t(), 2) <= 62;
}

inline std::uint64_t to_u64(const Int& v) {
  std::uint64_t out = 0;
  size_t count = 0;
  mpz_export(&out, &count, 1, sizeof(out), 0, 0, v.get_mpz_t());
  return count == 0 ? 0 : out;
}

inline std::int64_t to_i64(const Int& v) {
  const std::uint64_t mag = to_u64(abs(v));
  return sgn(v) < 0 ? -static_cast<std::int64_t>(mag) : static_cast<std::int64_t>(mag);
}

inline Int pow_int(const Int& base, unsigned long exp) {
  Int out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

inline Int pow_ui(unsigned long base, unsigned long exp) {
  Int out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

/// Canonical residue in [0, m) for m > 0.
inline Int mod_floor(const Int& a, const Int& m) {
  Int out;
  mpz_fdiv_r(out.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
  return out;
}

inline Int floor_div(const Int& a, const Int& b) {
  Int out;
  mpz_fdiv_q(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline Int gcd_int(const Int& a, const Int& b) {
  Int out;
  mpz_gcd(out.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return out;
}

inline std::optional<Int> mod_inverse(const Int& a, const Int& m) {
  Int out;
  if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0) return std::nullopt;
  return out;
}

inline std::size_t bit_length(const Int& v) {
  return sgn(v) == 0 ? 0 : mpz_sizeinbase(v.get_mpz_t(), 2);
}

}  // namespace qfam
