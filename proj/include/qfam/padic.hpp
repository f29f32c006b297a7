#pragma once

// Split-prime p-adic machinery: Hensel-lifted square roots, embeddings
// O_K -> Z/p^k selecting a prime above p, valuations at that prime, and an
// independent residue ring O_K / p^e O_K for congruences modulo p^e.

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>
#include <qfam/quadfield.hpp>

#include <algorithm>
#include <string>

namespace qfam {

inline constexpr unsigned long kDefaultPrecisionCap = 64;

namespace detail {

// Tonelli-Shanks; a must be a nonzero quadratic residue mod the odd prime p.
inline Int sqrt_mod_prime(const Int& a_in, const Int& p) {
  const Int a = mod_floor(a_in, p);
  if (mpz_fdiv_ui(p.get_mpz_t(), 4) == 3) return modpow(a, (p + 1) / 4, p);
  Int q = p - 1;
  unsigned long s = 0;
  while (mpz_even_p(q.get_mpz_t())) {
    q /= 2;
    ++s;
  }
  Int z = 2;
  while (jacobi(z, p) != -1) ++z;
  Int c = modpow(z, q, p);
  Int x = modpow(a, (q + 1) / 2, p);
  Int t = modpow(a, q, p);
  unsigned long m = s;
  while (t != 1) {
    unsigned long i = 0;
    Int tt = t;
    while (tt != 1) {
      tt = tt * tt % p;
      ++i;
    }
    Int b = c;
    for (unsigned long j = 0; j + 1 < m - i; ++j) b = b * b % p;
    x = x * b % p;
    c = b * b % p;
    t = t * c % p;
    m = i;
  }
  return x;
}

// Unique root of s^2 = D mod p^k congruent to r0 mod p.
inline Int lift_root(const Int& D, const Int& p, const Int& r0, unsigned long k) {
  Int s = mod_floor(r0, p);
  Int mod = p;
  unsigned long prec = 1;
  while (prec < k) {
    prec = std::min(2 * prec, k);
    mod = pow_int(p, prec);
    const auto inv = mod_inverse(2 * s, mod);
    s = mod_floor(s - (s * s - D) * *inv, mod);
  }
  return s;
}

inline void require_split(const Int& D, const Int& p) {
  if (p < 3 || !is_prime(p)) fail(ErrorKind::invalid_argument, "p must be an odd prime");
  if (mpz_divisible_p(D.get_mpz_t(), p.get_mpz_t())) {
    fail(ErrorKind::no_embedding, "p = " + to_dec(p) + " divides D = " + to_dec(D));
  }
  if (jacobi(D, p) != 1) {
    fail(ErrorKind::no_embedding, "p = " + to_dec(p) + " does not split in Q(sqrt " + to_dec(D) + ")");
  }
}

}  // namespace detail

/// Smallest non-negative s with s^2 = D (mod p^k).
inline Int hensel_sqrt(const Int& D, const Int& p, unsigned long k) {
  if (k == 0) fail(ErrorKind::invalid_argument, "precision must be positive");
  detail::require_split(D, p);
  const Int r0 = detail::sqrt_mod_prime(D, p);
  const Int s = detail::lift_root(D, p, r0, k);
  const Int mod = pow_int(p, k);
  return std::min(s, Int(mod - s));
}

enum class Branch { primary, conjugate };

inline const char* to_string(Branch b) { return b == Branch::primary ? "primary" : "conjugate"; }

/// O_K -> Z/p^k sending sqrt D to s; the residue of s mod p fixes the prime.
class SplitPrimeEmbedding {
 public:
  SplitPrimeEmbedding(const QuadraticField& field, const Int& p, unsigned long k, const Int& root_mod_p,
                      Branch branch)
      : field_(field), p_(p), k_(k), root_mod_p_(mod_floor(root_mod_p, p)), branch_(branch) {
    if (k == 0) fail(ErrorKind::invalid_argument, "precision must be positive");
    detail::require_split(field.D(), p);
    if (mod_floor(root_mod_p_ * root_mod_p_ - field.D(), p) != 0) {
      fail(ErrorKind::invalid_argument, "root_mod_p is not a square root of D mod p");
    }
    modulus_ = pow_int(p, k);
    s_ = detail::lift_root(field.D(), p, root_mod_p_, k);
  }

  const QuadraticField& field() const { return field_; }
  const Int& p() const { return p_; }
  unsigned long k() const { return k_; }
  const Int& s() const { return s_; }
  const Int& modulus() const { return modulus_; }
  const Int& root_mod_p() const { return root_mod_p_; }
  Branch branch() const { return branch_; }

  SplitPrimeEmbedding with_precision(unsigned long k) const {
    return SplitPrimeEmbedding(field_, p_, k, root_mod_p_, branch_);
  }

  /// The embedding for the other prime above p.
  SplitPrimeEmbedding conjugate() const {
    return SplitPrimeEmbedding(field_, p_, k_, p_ - root_mod_p_,
                               branch_ == Branch::primary ? Branch::conjugate : Branch::primary);
  }

 private:
  QuadraticField field_;
  Int p_;
  unsigned long k_;
  Int root_mod_p_;
  Branch branch_;
  Int modulus_;
  Int s_;
};

/// Primary branch for a general field: the root whose residue mod p is smaller.
inline SplitPrimeEmbedding make_embedding(const QuadraticField& field, const Int& p, unsigned long k,
                                          Branch branch = Branch::primary) {
  detail::require_split(field.D(), p);
  const Int r = detail::sqrt_mod_prime(field.D(), p);
  const Int small = std::min(r, Int(p - r));
  const Int root = branch == Branch::primary ? small : Int(p - small);
  return SplitPrimeEmbedding(field, p, k, root, branch);
}

/// Primary branch for a family field: b*s = 1 (mod p^min(k, 2r)), so that
/// the prime above p with p^(2r) = (b sqrt D - 1) is the primary one.
inline SplitPrimeEmbedding family_embedding(const FamilyField& fam, unsigned long k,
                                            Branch branch = Branch::primary) {
  const auto binv = mod_inverse(fam.b, fam.p);
  const Int root = branch == Branch::primary ? *binv : Int(fam.p - *binv);
  SplitPrimeEmbedding emb(fam.field, fam.p, k, root, branch);
  const Int check_mod = pow_int(fam.p, std::min<unsigned long>(k, 2ul * fam.r));
  const Int bs = mod_floor(fam.b * emb.s(), check_mod);
  const Int expected = branch == Branch::primary ? Int(1) : Int(check_mod - 1);
  if (bs != mod_floor(expected, check_mod)) fail(ErrorKind::defect, "family branch normalization failed");
  return emb;
}

/// (u + v s) / den mod p^k.
inline Int embed(const QuadInt& x, const SplitPrimeEmbedding& emb) {
  if (!(x.field() == emb.field())) fail(ErrorKind::invalid_argument, "element and embedding fields differ");
  Int num = mod_floor(x.u() + x.v() * emb.s(), emb.modulus());
  if (x.den() == 2) num = mod_floor(num * *mod_inverse(Int(2), emb.modulus()), emb.modulus());
  return num;
}

/// Valuation of x at the prime selected by emb; precision doubles from
/// emb.k() until resolved or `cap` digits are exhausted.
inline unsigned long pvaluation(const QuadInt& x, const SplitPrimeEmbedding& emb,
                                unsigned long cap = kDefaultPrecisionCap) {
  if (x.is_zero()) fail(ErrorKind::undefined_valuation, "valuation of zero");
  for (unsigned long k = std::max<unsigned long>(1, emb.k());;) {
    const auto e = emb.with_precision(k);
    const Int img = embed(x, e);
    if (sgn(img) != 0) return valuation(img, emb.p());
    if (k >= cap) {
      fail(ErrorKind::precision_exhausted, "valuation of " + x.str() + " exceeds " + std::to_string(cap) + " digits");
    }
    k = std::min(2 * k, cap);
  }
}

/// Valuation of x^e - 1 at the prime selected by emb (x prime to it).
inline unsigned long power_minus_one_valuation(const QuadInt& x, const Int& exponent, const SplitPrimeEmbedding& emb,
                                               unsigned long cap = kDefaultPrecisionCap) {
  for (unsigned long k = std::max<unsigned long>(2, emb.k());;) {
    const auto e = emb.with_precision(k);
    const Int img = embed(x, e);
    if (mpz_divisible_p(img.get_mpz_t(), emb.p().get_mpz_t())) {
      fail(ErrorKind::invalid_argument, x.str() + " is not prime to the chosen prime above p");
    }
    const Int diff = mod_floor(modpow(img, exponent, e.modulus()) - 1, e.modulus());
    if (sgn(diff) != 0) return valuation(diff, emb.p());
    if (k >= cap) {
      fail(ErrorKind::precision_exhausted,
           "congruence order of " + x.str() + " exceeds " + std::to_string(cap) + " digits");
    }
    k = std::min(2 * k, cap);
  }
}

/// nu(t^(p-1) - 1) for a unit t.
inline unsigned long unit_congruence_order(const QuadInt& t, const SplitPrimeEmbedding& emb,
                                           unsigned long cap = kDefaultPrecisionCap) {
  if (!t.is_unit()) fail(ErrorKind::not_a_unit, t.str() + " is not a unit");
  return power_minus_one_valuation(t, emb.p() - 1, emb, cap);
}

// ---------------------------------------------------------------------------
// O_K / n O_K in the integral basis {1, w}

class ResidueRing {
 public:
  struct Elem {
    Int a;  // a + b w
    Int b;
    friend bool operator==(const Elem&, const Elem&) = default;
  };

  ResidueRing(const QuadraticField& field, const Int& modulus) : field_(field), n_(modulus) {
    if (modulus < 2) fail(ErrorKind::invalid_argument, "residue ring modulus must be >= 2");
    // w^2 = c1 w + c0
    if (field.half_integral()) {
      c1_ = 1;
      c0_ = (field.D() - 1) / 4;
    } else {
      c1_ = 0;
      c0_ = field.D();
    }
  }

  Elem reduce(const QuadInt& x) const {
    if (!(x.field() == field_)) fail(ErrorKind::invalid_argument, "element and ring fields differ");
    if (!field_.half_integral()) return {mod_floor(x.u(), n_), mod_floor(x.v(), n_)};
    // sqrt D = 2w - 1
    if (x.den() == 1) return {mod_floor(x.u() - x.v(), n_), mod_floor(2 * x.v(), n_)};
    return {mod_floor((x.u() - x.v()) / 2, n_), mod_floor(x.v(), n_)};
  }

  Elem mul(const Elem& x, const Elem& y) const {
    const Int bb = x.b * y.b;
    return {mod_floor(x.a * y.a + bb * c0_, n_), mod_floor(x.a * y.b + x.b * y.a + bb * c1_, n_)};
  }

  Elem pow(Elem base, Int e) const {
    Elem out{1, 0};
    while (sgn(e) > 0) {
      if (mpz_odd_p(e.get_mpz_t())) out = mul(out, base);
      base = mul(base, base);
      e /= 2;
    }
    return out;
  }

  bool is_one(const Elem& x) const { return x == Elem{mod_floor(Int(1), n_), 0}; }

 private:
  QuadraticField field_;
  Int n_;
  Int c0_;
  Int c1_;
};

/// x^e = 1 (mod n O_K).
inline bool power_is_one_mod(const QuadInt& x, const Int& e, const Int& n) {
  const ResidueRing ring(x.field(), n);
  return ring.is_one(ring.pow(ring.reduce(x), e));
}

}  // namespace qfam
