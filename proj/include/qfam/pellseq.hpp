#pragma once

// The companion Pell pair (1 + sqrt 2)^n = G_n + F_n sqrt 2 and the
// divisibility structure of G.

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>

#include <cstdlib>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace qfam {

struct PellPair {
  long n = 0;
  Int G;
  Int F;

  friend bool operator==(const PellPair&, const PellPair&) = default;
};

/// Exact (G_n, F_n) by binary powering in Z[sqrt 2]. For negative n the
/// ring inverse gives G_(-n) = (-1)^n G_n and F_(-n) = (-1)^(n+1) F_n.
inline PellPair pell_pair(long n) {
  // base = 1 + sqrt 2, or its inverse -1 + sqrt 2
  Int bg = n >= 0 ? 1 : -1, bf = 1;
  Int g = 1, f = 0;
  unsigned long e = static_cast<unsigned long>(std::labs(n));
  while (e) {
    if (e & 1) {
      Int ng = g * bg + 2 * f * bf;
      Int nf = g * bf + f * bg;
      g = std::move(ng);
      f = std::move(nf);
    }
    e >>= 1;
    if (e) {
      Int ng = bg * bg + 2 * bf * bf;
      Int nf = 2 * bg * bf;
      bg = std::move(ng);
      bf = std::move(nf);
    }
  }
  return {n, g, f};
}

inline Int pell_g(long n) { return pell_pair(n).G; }

/// G_(l+m) = 2 G_m G_l - (-1)^m G_(l-m), both sides evaluated exactly.
inline bool addition_identity_check(long l, long m) {
  const Int lhs = pell_g(l + m);
  Int rhs = 2 * pell_g(m) * pell_g(l);
  if (m % 2 == 0) {
    rhs -= pell_g(l - m);
  } else {
    rhs += pell_g(l - m);
  }
  return lhs == rhs;
}

struct IndexPair {
  unsigned long l = 0;
  unsigned long r = 0;
  friend bool operator==(const IndexPair&, const IndexPair&) = default;
};

/// (l, r) -> (max(|l - 2r|, r), min(|l - 2r|, r)), ordering the input first.
inline IndexPair pair_reduce(unsigned long l, unsigned long r) {
  if (l < r) std::swap(l, r);
  const unsigned long d = l >= 2 * r ? l - 2 * r : 2 * r - l;
  return {std::max(d, r), std::min(d, r)};
}

/// Iterates pair_reduce until the larger index stops decreasing; returns the
/// full chain, first element the ordered input.
inline std::vector<IndexPair> pair_reduction_chain(unsigned long l, unsigned long r) {
  if (l < r) std::swap(l, r);
  std::vector<IndexPair> chain{{l, r}};
  for (;;) {
    const auto cur = chain.back();
    const auto next = pair_reduce(cur.l, cur.r);
    chain.push_back(next);
    if (next.l == cur.l) break;
  }
  return chain;
}

inline unsigned long two_adic(unsigned long n) { return n == 0 ? 0 : static_cast<unsigned long>(__builtin_ctzl(n)); }

/// gcd(G_l, G_m) from the closed form: G_gcd(l,m) when the 2-adic
/// valuations of l and m agree, 1 otherwise.
inline Int g_gcd(unsigned long l, unsigned long m) {
  if (l == 0 || m == 0) fail(ErrorKind::invalid_argument, "g_gcd indices must be positive");
  if (two_adic(l) != two_adic(m)) return 1;
  return pell_g(static_cast<long>(std::gcd(l, m)));
}

/// gcd(G_l, G_m) read off the terminal pair of the reduction chain.
inline Int g_gcd_by_reduction(unsigned long l, unsigned long m) {
  if (l == 0 || m == 0) fail(ErrorKind::invalid_argument, "g_gcd indices must be positive");
  // the chain stalls at (k, k) or at (k, 0)
  const auto last = pair_reduction_chain(l, m).back();
  if (last.r == 0) return 1;  // G_0 = 1
  return pell_g(static_cast<long>(last.l));
}

/// gcd(G_l, G_m) by direct computation.
inline Int g_gcd_oracle(unsigned long l, unsigned long m) {
  if (l == 0 || m == 0) fail(ErrorKind::invalid_argument, "g_gcd indices must be positive");
  return gcd_int(pell_g(static_cast<long>(l)), pell_g(static_cast<long>(m)));
}

struct PrimePowerHit {
  unsigned long n = 0;
  unsigned long r = 0;
  friend bool operator==(const PrimePowerHit&, const PrimePowerHit&) = default;
};

/// All n <= n_max with G_n = p^r, r >= 2. G is generated incrementally;
/// only terms that are pure powers of p go through perfect_power. More than one hit
/// contradicts the at-most-one lemma and raises a defect.
inline std::vector<PrimePowerHit> prime_power_search(const Int& p, unsigned long n_max) {
  if (p < 3 || !is_prime(p)) fail(ErrorKind::invalid_argument, "p must be an odd prime");
  std::vector<PrimePowerHit> hits;
  Int prev = 1, cur = 1;  // G_0, G_1
  for (unsigned long n = 1; n <= n_max; ++n) {
    if (n > 1) {
      Int next = 2 * cur + prev;
      prev = std::move(cur);
      cur = std::move(next);
    }
    if (cur < 2 || !mpz_divisible_p(cur.get_mpz_t(), p.get_mpz_t())) continue;
    if (pow_int(p, valuation(cur, p)) != cur) continue;
    const auto pp = perfect_power(cur);
    if (!pp) continue;
    // cur = x^d with x not a perfect power; a power of p forces x = p
    if (pp->base == p && pp->exponent >= 2) hits.push_back({n, pp->exponent});
  }
  if (hits.size() >= 2) fail(ErrorKind::defect, "more than one solution of G_n = p^r");
  return hits;
}

}  // namespace qfam
