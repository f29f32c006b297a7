#pragma once

// Class numbers of real quadratic fields from cycles of reduced indefinite
// binary quadratic forms.

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>
#include <qfam/quadfield.hpp>

#include <cstdint>
#include <cstdlib>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace qfam {

inline constexpr std::int64_t kDefaultClassnoCeiling = 10'000'000'000;

struct QuadForm {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;

  std::int64_t disc() const { return b * b - 4 * a * c; }

  friend auto operator<=>(const QuadForm&, const QuadForm&) = default;
};

namespace detail {

inline std::int64_t isqrt64(std::int64_t n) { return to_i64(isqrt(make_int(n))); }

inline void validate_disc(std::int64_t disc) {
  if (disc <= 0) fail(ErrorKind::invalid_argument, "discriminant must be positive");
  const auto r = disc % 4;
  if (r != 0 && r != 1) fail(ErrorKind::invalid_argument, "discriminant must be 0 or 1 mod 4");
  const auto s = isqrt64(disc);
  if (s * s == disc) fail(ErrorKind::invalid_argument, "discriminant must not be a square");
}

}  // namespace detail

/// |sqrt(disc) - 2|a|| < b < sqrt(disc), in exact integer form.
inline bool is_reduced(const QuadForm& f) {
  const std::int64_t disc = f.disc();
  const std::int64_t s = detail::isqrt64(disc);
  const std::int64_t a2 = 2 * std::llabs(f.a);
  return f.b > 0 && f.b <= s && a2 + f.b > s && a2 - f.b <= s;
}

/// rho(a, b, c) = (c, b', (b'^2 - disc) / 4c) with b' = -b (mod 2|c|) in the
/// standard window.
inline QuadForm rho_reduce(const QuadForm& f) {
  const std::int64_t disc = f.disc();
  if (f.c == 0) fail(ErrorKind::invalid_argument, "form has c = 0");
  const std::int64_t s = detail::isqrt64(disc);
  const std::int64_t c2 = 2 * std::llabs(f.c);
  std::int64_t lo;  // b' ranges over [lo, lo + 2|c|)
  if (static_cast<__int128>(f.c) * f.c < disc) {
    lo = s + 1 - c2;
  } else {
    lo = -std::llabs(f.c) + 1;
  }
  std::int64_t bp = (-f.b - lo) % c2;
  if (bp < 0) bp += c2;
  bp += lo;
  const __int128 num = static_cast<__int128>(bp) * bp - disc;
  return QuadForm{f.c, bp, static_cast<std::int64_t>(num / (4 * static_cast<__int128>(f.c)))};
}

/// Every reduced form of the given discriminant, sorted.
inline std::vector<QuadForm> reduced_forms(std::int64_t disc) {
  detail::validate_disc(disc);
  const std::int64_t s = detail::isqrt64(disc);
  std::vector<QuadForm> out;
  const auto primes = PrimeTable::up_to(static_cast<std::uint32_t>(detail::isqrt64(disc / 4 + 1) + 2));
  for (std::int64_t b = (disc % 2 == 0) ? 2 : 1; b <= s; b += 2) {
    const std::int64_t n = (disc - b * b) / 4;  // a * c = -n
    // divisors of n via trial factorization
    std::vector<std::int64_t> divisors{1};
    std::int64_t rem = n;
    for (std::uint32_t p : *primes) {
      if (static_cast<std::int64_t>(p) * p > rem) break;
      if (rem % p) continue;
      int e = 0;
      while (rem % p == 0) {
        rem /= p;
        ++e;
      }
      const auto count = divisors.size();
      std::int64_t pk = 1;
      for (int i = 0; i < e; ++i) {
        pk *= p;
        for (std::size_t j = 0; j < count; ++j) divisors.push_back(divisors[j] * pk);
      }
    }
    if (rem > 1) {
      const auto count = divisors.size();
      for (std::size_t j = 0; j < count; ++j) divisors.push_back(divisors[j] * rem);
    }
    for (std::int64_t d : divisors) {
      if (2 * d + b <= s || 2 * d - b > s) continue;
      for (std::int64_t a : {d, -d}) {
        QuadForm f{a, b, -n / a};
        if (is_reduced(f)) out.push_back(f);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Reduced forms partitioned into rho-cycles; each cycle starts at its
/// smallest form and cycles are sorted.
inline std::vector<std::vector<QuadForm>> form_cycles(std::int64_t disc) {
  const auto forms = reduced_forms(disc);
  std::set<QuadForm> unseen(forms.begin(), forms.end());
  std::vector<std::vector<QuadForm>> cycles;
  for (const auto& start : forms) {
    if (!unseen.count(start)) continue;
    std::vector<QuadForm> cycle;
    QuadForm f = start;
    do {
      if (!unseen.erase(f)) fail(ErrorKind::defect, "rho left the set of reduced forms");
      cycle.push_back(f);
      f = rho_reduce(f);
    } while (!(f == start));
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

/// h+ = number of rho-cycles of reduced forms.
inline std::int64_t narrow_class_number(std::int64_t disc) {
  return static_cast<std::int64_t>(form_cycles(disc).size());
}

/// h = h+ when the fundamental unit has norm -1, else h+/2.
inline Int class_number(const QuadraticField& field, std::int64_t ceiling = kDefaultClassnoCeiling) {
  if (field.disc() > ceiling) {
    fail(ErrorKind::too_large, "discriminant " + to_dec(field.disc()) + " exceeds the class-number ceiling");
  }
  const std::int64_t disc = to_i64(field.disc());
  const std::int64_t hplus = narrow_class_number(disc);
  if (unit_norm_sign(field) == -1) return make_int(hplus);
  if (hplus % 2) fail(ErrorKind::defect, "odd narrow class number with a norm +1 fundamental unit");
  return make_int(hplus / 2);
}

}  // namespace qfam
