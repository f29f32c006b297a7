#pragma once

// Exact integer primitives: roots, symbols, modular powers, primality,
// factorization, squarefree parts, valuations, perfect powers.

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qfam {

inline constexpr unsigned long kDefaultFactorEffort = 1'000'000;

/// floor(sqrt(n)).
inline Int isqrt(const Int& n) {
  if (sgn(n) < 0) fail(ErrorKind::invalid_argument, "isqrt of negative integer");
  Int out;
  mpz_sqrt(out.get_mpz_t(), n.get_mpz_t());
  return out;
}

/// floor(n^(1/k)) for n >= 0, k >= 1.
inline Int iroot(const Int& n, unsigned long k) {
  if (sgn(n) < 0 || k == 0) fail(ErrorKind::invalid_argument, "iroot domain");
  Int out;
  mpz_root(out.get_mpz_t(), n.get_mpz_t(), k);
  return out;
}

inline bool is_square(const Int& n) { return sgn(n) >= 0 && mpz_perfect_square_p(n.get_mpz_t()) != 0; }

/// Jacobi symbol (a/n) for odd n >= 1, via the binary reciprocity algorithm.
inline int jacobi(const Int& a_in, const Int& n_in) {
  if (sgn(n_in) <= 0 || mpz_even_p(n_in.get_mpz_t())) {
    fail(ErrorKind::invalid_argument, "jacobi modulus must be odd and positive");
  }
  Int n = n_in;
  Int a = mod_floor(a_in, n);
  int result = 1;
  while (sgn(a) != 0) {
    const auto twos = mpz_scan1(a.get_mpz_t(), 0);
    if (twos > 0) {
      mpz_fdiv_q_2exp(a.get_mpz_t(), a.get_mpz_t(), twos);
      const unsigned long n8 = mpz_fdiv_ui(n.get_mpz_t(), 8);
      if ((twos & 1) && (n8 == 3 || n8 == 5)) result = -result;
    }
    std::swap(a, n);
    if (mpz_fdiv_ui(a.get_mpz_t(), 4) == 3 && mpz_fdiv_ui(n.get_mpz_t(), 4) == 3) result = -result;
    a = mod_floor(a, n);
  }
  return n == 1 ? result : 0;
}

/// base^exp mod modulus, canonical in [0, modulus).
inline Int modpow(const Int& base, const Int& exp, const Int& modulus) {
  if (modulus < 2) fail(ErrorKind::invalid_argument, "modpow modulus must be >= 2");
  if (sgn(exp) < 0) fail(ErrorKind::invalid_argument, "modpow exponent must be non-negative");
  Int out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
  return out;
}

// ---------------------------------------------------------------------------
// Primes

/// Shared, lazily grown table of primes. Safe for concurrent readers.
class PrimeTable {
 public:
  static std::shared_ptr<const std::vector<std::uint32_t>> up_to(std::uint32_t limit) {
    static std::mutex mu;
    static std::shared_ptr<const std::vector<std::uint32_t>> table;
    static std::uint32_t covered = 0;
    std::lock_guard<std::mutex> lock(mu);
    if (!table || covered < limit) {
      covered = std::max<std::uint32_t>(limit, 1u << 16);
      table = std::make_shared<const std::vector<std::uint32_t>>(sieve(covered));
    }
    return table;
  }

 private:
  static std::vector<std::uint32_t> sieve(std::uint32_t limit) {
    std::vector<bool> composite(static_cast<std::size_t>(limit) + 1, false);
    std::vector<std::uint32_t> primes;
    for (std::uint64_t i = 2; i <= limit; ++i) {
      if (composite[i]) continue;
      primes.push_back(static_cast<std::uint32_t>(i));
      for (std::uint64_t j = i * i; j <= limit; j += i) composite[j] = true;
    }
    return primes;
  }
};

namespace detail {

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline u64 mulmod64(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

inline u64 powmod64(u64 b, u64 e, u64 m) {
  u64 r = 1 % m;
  b %= m;
  while (e) {
    if (e & 1) r = mulmod64(r, b, m);
    b = mulmod64(b, b, m);
    e >>= 1;
  }
  return r;
}

inline bool strong_probable_prime64(u64 n, u64 a) {
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  u64 x = powmod64(a % n, d, n);
  if (x == 1 || x == n - 1 || a % n == 0) return true;
  for (int i = 1; i < s; ++i) {
    x = mulmod64(x, x, n);
    if (x == n - 1) return true;
  }
  return false;
}

inline bool strong_probable_prime(const Int& n, unsigned long a) {
  Int d = n - 1;
  const auto s = mpz_scan1(d.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(d.get_mpz_t(), d.get_mpz_t(), s);
  Int x = modpow(Int(a), d, n);
  const Int nm1 = n - 1;
  if (x == 1 || x == nm1) return true;
  for (unsigned long i = 1; i < s; ++i) {
    x = x * x % n;
    if (x == nm1) return true;
  }
  return false;
}

// Strong-pseudoprime bases {2,...,41} are deterministic below this value.
inline const Int& deterministic_mr_limit() {
  static const Int limit("3317044064679887385961981");
  return limit;
}

}  // namespace detail

/// Deterministic below 3.3e24 (Miller-Rabin with the first 13 prime bases);
/// above that, Baillie-PSW as provided by GMP.
inline bool is_prime(const Int& n) {
  if (n < 2) return false;
  static constexpr unsigned kBases[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
  for (unsigned p : kBases) {
    if (n == p) return true;
    if (mpz_divisible_ui_p(n.get_mpz_t(), p)) return false;
  }
  if (fits_u64(n)) {
    const auto v = to_u64(n);
    for (unsigned a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
      if (!detail::strong_probable_prime64(v, a)) return false;
    }
    return true;
  }
  if (n < detail::deterministic_mr_limit()) {
    for (unsigned a : kBases) {
      if (!detail::strong_probable_prime(n, a)) return false;
    }
    return true;
  }
  return mpz_probab_prime_p(n.get_mpz_t(), 32) > 0;
}

// ---------------------------------------------------------------------------
// Factorization

struct PrimePower {
  Int prime;
  unsigned exponent = 0;

  friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

struct Factorization {
  Int value;
  std::vector<PrimePower> factors;  // strictly increasing primes
  bool complete = false;
  Int cofactor = 1;  // unresolved composite part when incomplete

  Int product() const {
    Int out = 1;
    for (const auto& f : factors) out *= pow_int(f.prime, f.exponent);
    return out;
  }
};

namespace detail {

inline std::optional<u64> brent_rho64(u64 n, u64 c, u64 max_iters) {
  if ((n & 1) == 0) return 2;
  u64 y = 2, x = 2, q = 1, g = 1, ys = 2;
  const u64 m = 128;
  u64 r = 1, iters = 0;
  auto f = [&](u64 v) { return (mulmod64(v, v, n) + c) % n; };
  while (g == 1) {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    while (k < r && g == 1) {
      ys = y;
      const u64 lim = std::min(m, r - k);
      for (u64 i = 0; i < lim; ++i) {
        y = f(y);
        q = mulmod64(q, x > y ? x - y : y - x, n);
      }
      g = std::gcd(q, n);
      k += lim;
      iters += lim;
      if (iters > max_iters) return std::nullopt;
    }
    r <<= 1;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = std::gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  if (g == n) return std::nullopt;
  return g;
}

inline std::optional<Int> brent_rho(const Int& n, unsigned long c, unsigned long max_iters) {
  if (fits_u64(n) && to_u64(n) < (1ull << 63)) {
    auto g = brent_rho64(to_u64(n), c, max_iters);
    if (!g) return std::nullopt;
    return make_uint(*g);
  }
  Int y = 2, x = 2, q = 1, g = 1, ys = 2;
  const unsigned long m = 128;
  unsigned long r = 1, iters = 0;
  auto f = [&](const Int& v) { return Int((v * v + c) % n); };
  while (g == 1) {
    x = y;
    for (unsigned long i = 0; i < r; ++i) y = f(y);
    unsigned long k = 0;
    while (k < r && g == 1) {
      ys = y;
      const unsigned long lim = std::min(m, r - k);
      for (unsigned long i = 0; i < lim; ++i) {
        y = f(y);
        q = q * abs(x - y) % n;
      }
      g = gcd_int(q, n);
      k += lim;
      iters += lim;
      if (iters > max_iters) return std::nullopt;
    }
    r <<= 1;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = gcd_int(abs(x - ys), n);
    } while (g == 1);
  }
  if (g == n) return std::nullopt;
  return g;
}

// Splits a cofactor whose primes all exceed the trial bound.
inline void split_cofactor(const Int& n, unsigned long rho_budget, std::vector<Int>& primes, Int& unresolved) {
  if (n == 1) return;
  if (is_prime(n)) {
    primes.push_back(n);
    return;
  }
  if (is_square(n)) {
    const Int root = isqrt(n);
    split_cofactor(root, rho_budget, primes, unresolved);
    split_cofactor(root, rho_budget, primes, unresolved);
    return;
  }
  // Deterministic sequence of polynomial constants keeps runs reproducible.
  for (unsigned long c = 1; c <= 8; ++c) {
    if (auto d = brent_rho(n, c, rho_budget)) {
      split_cofactor(*d, rho_budget, primes, unresolved);
      split_cofactor(n / *d, rho_budget, primes, unresolved);
      return;
    }
  }
  unresolved *= n;
}

}  // namespace detail

/// Trial division by primes up to `effort`, then Brent's rho with fixed seeds.
/// `complete` is false when a composite cofactor could not be split.
inline Factorization factor(const Int& n, unsigned long effort = kDefaultFactorEffort) {
  if (n < 2) fail(ErrorKind::invalid_argument, "factor requires n >= 2");
  Factorization out;
  out.value = n;
  Int rem = n;
  std::vector<Int> found;

  const auto table = PrimeTable::up_to(static_cast<std::uint32_t>(std::min<unsigned long>(effort, 0xFFFFFFF0ul)));
  for (std::uint32_t p : *table) {
    if (p > effort) break;
    if (Int(p) * p > rem) break;
    // every remaining prime factor is >= p, so at most two remain; rho takes over
    if (Int(p) * p * p > rem) break;
    if (fits_u64(rem)) {
      std::uint64_t v = to_u64(rem);
      if (v % p == 0) {
        unsigned e = 0;
        while (v % p == 0) {
          v /= p;
          ++e;
        }
        out.factors.push_back({Int(p), e});
        rem = make_uint(v);
      }
    } else if (mpz_divisible_ui_p(rem.get_mpz_t(), p)) {
      unsigned e = 0;
      while (mpz_divisible_ui_p(rem.get_mpz_t(), p)) {
        mpz_divexact_ui(rem.get_mpz_t(), rem.get_mpz_t(), p);
        ++e;
      }
      out.factors.push_back({Int(p), e});
    }
  }

  Int unresolved = 1;
  const unsigned long rho_budget = std::max<unsigned long>(4 * effort, 16);
  detail::split_cofactor(rem, rho_budget, found, unresolved);

  std::sort(found.begin(), found.end());
  for (const auto& q : found) {
    if (!out.factors.empty() && out.factors.back().prime == q) {
      ++out.factors.back().exponent;
    } else {
      out.factors.push_back({q, 1});
    }
  }
  std::sort(out.factors.begin(), out.factors.end(),
            [](const PrimePower& a, const PrimePower& b) { return a.prime < b.prime; });
  out.cofactor = unresolved;
  out.complete = (unresolved == 1);
  return out;
}

struct SquarefreeParts {
  Int b;  // n = b^2 * D
  Int D;
};

/// Squarefree decomposition from a complete factorization.
inline SquarefreeParts squarefree_from(const Factorization& f) {
  if (!f.complete) {
    fail(ErrorKind::cannot_certify, "factorization of " + to_dec(f.value) + " is incomplete");
  }
  SquarefreeParts out{1, 1};
  for (const auto& pp : f.factors) {
    out.b *= pow_int(pp.prime, pp.exponent / 2);
    if (pp.exponent % 2) out.D *= pp.prime;
  }
  return out;
}

/// n = b^2 * D with D squarefree and b maximal.
inline SquarefreeParts squarefree_decompose(const Int& n, unsigned long effort = kDefaultFactorEffort) {
  if (n < 1) fail(ErrorKind::invalid_argument, "squarefree_decompose requires n >= 1");
  if (n == 1) return {1, 1};
  return squarefree_from(factor(n, effort));
}

/// Largest e with p^e | n.
inline unsigned long valuation(const Int& n, const Int& p) {
  if (sgn(n) == 0) fail(ErrorKind::undefined_valuation, "valuation of zero");
  if (p < 2) fail(ErrorKind::invalid_argument, "valuation base must be >= 2");
  Int rem;
  return mpz_remove(rem.get_mpz_t(), n.get_mpz_t(), p.get_mpz_t());
}

/// v_p(C(p^l, i)) = l - v_p(i) for 1 <= i <= p^l.
inline unsigned long binom_valuation(const Int& p, unsigned long l, const Int& i) {
  if (l == 0) fail(ErrorKind::invalid_argument, "binom_valuation requires l >= 1");
  if (i < 1 || i > pow_int(p, l)) fail(ErrorKind::invalid_argument, "binom_valuation index out of range");
  return l - valuation(i, p);
}

struct PerfectPower {
  Int base;
  unsigned long exponent = 0;
};

/// n = x^d with d >= 2 maximal, or nullopt.
inline std::optional<PerfectPower> perfect_power(const Int& n) {
  if (n < 2) fail(ErrorKind::invalid_argument, "perfect_power requires n >= 2");
  Int x = n;
  unsigned long d = 1;
  const auto table = PrimeTable::up_to(1u << 16);
  for (std::uint32_t q : *table) {
    if (q > bit_length(x)) break;
    for (;;) {
      Int root;
      if (mpz_root(root.get_mpz_t(), x.get_mpz_t(), q) == 0) break;
      x = root;
      d *= q;
    }
  }
  if (d < 2) return std::nullopt;
  return PerfectPower{x, d};
}

/// True iff 2^(p-1) = 1 (mod p^2).
inline bool is_wieferich(const Int& p) {
  if (p == 2 || !is_prime(p)) fail(ErrorKind::invalid_argument, "is_wieferich requires an odd prime");
  return modpow(Int(2), p - 1, p * p) == 1;
}

}  // namespace qfam
