#pragma once

// Real quadratic fields Q(sqrt D): ring-of-integers elements, norms,
// continued-fraction fundamental units, unit indices, and the family
// Q(sqrt(m^2 p^(2r) + 1)).

#include <qfam/bigint.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>

#include <cmath>
#include <functional>
#include <optional>
#include <string>

namespace qfam {

enum class RingKind {
  integral,       // D = 2, 3 (mod 4): O_K = Z[sqrt D]
  half_integral,  // D = 1 (mod 4): O_K = Z[(1 + sqrt D)/2]
};

class QuadraticField {
 public:
  /// Validates D >= 2 and squarefree. Radicands above `kCheckLimit` are
  /// screened against small square factors only; use `certified` when the
  /// caller already holds a complete factorization.
  explicit QuadraticField(const Int& D) : D_(D) {
    if (D < 2) fail(ErrorKind::invalid_argument, "radicand must be >= 2");
    if (is_square(D)) fail(ErrorKind::invalid_argument, "radicand is a perfect square");
    if (D <= kCheckLimit) {
      const auto f = factor(D);
      for (const auto& pp : f.factors) {
        if (pp.exponent > 1) fail(ErrorKind::invalid_argument, "radicand " + to_dec(D) + " is not squarefree");
      }
    } else {
      for (std::uint32_t p : *PrimeTable::up_to(1000)) {
        if (p > 1000) break;
        if (mpz_divisible_ui_p(D.get_mpz_t(), p * p)) {
          fail(ErrorKind::invalid_argument, "radicand " + to_dec(D) + " is not squarefree");
        }
      }
    }
    init();
  }

  static QuadraticField certified(const Int& D) {
    QuadraticField out;
    out.D_ = D;
    out.init();
    return out;
  }

  const Int& D() const { return D_; }
  const Int& disc() const { return disc_; }
  RingKind ring_kind() const { return kind_; }
  bool half_integral() const { return kind_ == RingKind::half_integral; }

  friend bool operator==(const QuadraticField& a, const QuadraticField& b) { return a.D_ == b.D_; }

  static inline const Int kCheckLimit = Int("1000000000000");

 private:
  QuadraticField() = default;

  void init() {
    if (D_ < 2) fail(ErrorKind::invalid_argument, "radicand must be >= 2");
    if (mpz_fdiv_ui(D_.get_mpz_t(), 4) == 1) {
      kind_ = RingKind::half_integral;
      disc_ = D_;
    } else {
      kind_ = RingKind::integral;
      disc_ = 4 * D_;
    }
  }

  Int D_;
  Int disc_;
  RingKind kind_ = RingKind::integral;
};

/// (u + v sqrt D) / den with den in {1, 2}, kept canonical.
class QuadInt {
 public:
  QuadInt(const QuadraticField& field, Int u, Int v = 0, int den = 1)
      : field_(field), u_(std::move(u)), v_(std::move(v)), den_(den) {
    normalize(den);
  }

  static QuadInt from_int(const QuadraticField& field, const Int& n) { return QuadInt(field, n, 0, 1); }

  const QuadraticField& field() const { return field_; }
  const Int& u() const { return u_; }
  const Int& v() const { return v_; }
  int den() const { return den_; }

  bool is_zero() const { return sgn(u_) == 0 && sgn(v_) == 0; }

  QuadInt conj() const { return QuadInt(field_, u_, -v_, den_); }

  /// (u^2 - v^2 D) / den^2, always a rational integer.
  Int norm() const {
    Int num = u_ * u_ - v_ * v_ * field_.D();
    return den_ == 1 ? num : Int(num / 4);
  }

  /// x + conj(x).
  Int trace() const { return den_ == 1 ? Int(2 * u_) : u_; }

  bool is_unit() const { return abs(norm()) == 1; }

  /// Sign of the real embedding that sends sqrt D to the positive root.
  int sign() const {
    const int su = sgn(u_), sv = sgn(v_);
    if (su >= 0 && sv >= 0) return (su > 0 || sv > 0) ? 1 : 0;
    if (su <= 0 && sv <= 0) return -1;
    const Int lhs = u_ * u_;
    const Int rhs = v_ * v_ * field_.D();
    const int bigger_u = cmp(lhs, rhs) > 0 ? 1 : -1;
    return su > 0 ? bigger_u : -bigger_u;
  }

  friend bool operator==(const QuadInt& a, const QuadInt& b) {
    return a.field_ == b.field_ && a.den_ == b.den_ && a.u_ == b.u_ && a.v_ == b.v_;
  }

  friend QuadInt operator+(const QuadInt& a, const QuadInt& b) {
    a.require_same(b);
    const int den = std::max(a.den_, b.den_);
    const Int au = a.u_ * (den / a.den_), av = a.v_ * (den / a.den_);
    const Int bu = b.u_ * (den / b.den_), bv = b.v_ * (den / b.den_);
    return QuadInt(a.field_, au + bu, av + bv, den);
  }

  friend QuadInt operator-(const QuadInt& a) { return QuadInt(a.field_, -a.u_, -a.v_, a.den_); }
  friend QuadInt operator-(const QuadInt& a, const QuadInt& b) { return a + (-b); }

  friend QuadInt operator*(const QuadInt& a, const QuadInt& b) {
    a.require_same(b);
    const Int u = a.u_ * b.u_ + a.v_ * b.v_ * a.field_.D();
    const Int v = a.u_ * b.v_ + a.v_ * b.u_;
    return QuadInt(a.field_, u, v, a.den_ * b.den_);
  }

  friend QuadInt operator*(const QuadInt& a, const Int& n) { return QuadInt(a.field_, a.u_ * n, a.v_ * n, a.den_); }

  QuadInt& operator*=(const QuadInt& o) { return *this = *this * o; }
  QuadInt& operator+=(const QuadInt& o) { return *this = *this + o; }

  /// Inverse of a unit: conj / norm.
  QuadInt unit_inverse() const {
    const Int n = norm();
    if (abs(n) != 1) fail(ErrorKind::not_a_unit, "element " + str() + " is not a unit");
    return conj() * n;
  }

  /// x^k; negative k is allowed for units.
  QuadInt pow(long k) const {
    if (k < 0) return unit_inverse().pow(-k);
    QuadInt result = from_int(field_, 1);
    QuadInt base = *this;
    unsigned long e = static_cast<unsigned long>(k);
    while (e) {
      if (e & 1) result *= base;
      e >>= 1;
      if (e) base *= base;
    }
    return result;
  }

  std::string str() const {
    std::string out = den_ == 2 ? "(" : "";
    out += to_dec(u_);
    out += sgn(v_) < 0 ? "-" : "+";
    out += to_dec(abs(v_)) + "*sqrt(" + to_dec(field_.D()) + ")";
    if (den_ == 2) out += ")/2";
    return out;
  }

 private:
  void require_same(const QuadInt& o) const {
    if (!(field_ == o.field_)) fail(ErrorKind::invalid_argument, "elements lie in different fields");
  }

  // den may be 1, 2 or 4 on entry (products of canonical elements).
  void normalize(int den) {
    while (den > 1 && mpz_even_p(u_.get_mpz_t()) && mpz_even_p(v_.get_mpz_t())) {
      u_ /= 2;
      v_ /= 2;
      den /= 2;
    }
    if (den == 2 && sgn(u_) == 0 && sgn(v_) == 0) den = 1;
    if (den == 4 || (den == 2 && !field_.half_integral()) ||
        (den == 2 && mpz_even_p(u_.get_mpz_t()) != mpz_even_p(v_.get_mpz_t()))) {
      fail(ErrorKind::invalid_argument, "value is not in the ring of integers");
    }
    if (den != 1 && den != 2) fail(ErrorKind::invalid_argument, "denominator must be 1 or 2");
    den_ = den;
  }

  QuadraticField field_;
  Int u_;
  Int v_;
  int den_ = 1;
};

namespace detail {

inline long double log_abs(const Int& n) {
  long exp = 0;
  const double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log(std::fabs(static_cast<long double>(mant))) + static_cast<long double>(exp) * std::log(2.0L);
}

// log of a positive unit (u, v >= 0 when x > 1).
inline long double log_unit(const QuadInt& x) {
  if (x.sign() <= 0) fail(ErrorKind::invalid_argument, "log_unit expects a positive element");
  const QuadInt one = QuadInt::from_int(x.field(), 1);
  const bool above = (x - one).sign() >= 0;
  const QuadInt y = above ? x : x.conj() * x.norm();  // y = 1/x when x < 1
  long double lu = sgn(y.u()) == 0 ? -INFINITY : log_abs(y.u());
  long double lv = sgn(y.v()) == 0 ? -INFINITY : log_abs(y.v()) + 0.5L * log_abs(y.field().D());
  const long double hi = std::max(lu, lv), lo = std::min(lu, lv);
  long double lg = hi + std::log1p(std::exp(lo - hi)) - std::log(static_cast<long double>(y.den()));
  return above ? lg : -lg;
}

}  // namespace detail

/// floor of the real value of x.
inline Int floor_real(const QuadInt& x) {
  const Int vd = x.v() * x.v() * x.field().D();
  Int whole = x.u();
  if (sgn(x.v()) > 0) whole += isqrt(vd);
  if (sgn(x.v()) < 0) whole -= isqrt(vd) + 1;
  return floor_div(whole, Int(x.den()));
}

struct ContinuedFraction {
  Int first;                 // a_0
  std::vector<Int> period;   // a_1 .. a_l
};

namespace detail {

// Expansion of (P + sqrt D)/Q, starting from (0,1) or (1,2).
struct CfWalker {
  Int D, s, P, Q;
  explicit CfWalker(const QuadraticField& f) : D(f.D()), s(isqrt(f.D())) {
    P = f.half_integral() ? 1 : 0;
    Q = f.half_integral() ? 2 : 1;
  }
  Int step() {
    const Int a = floor_div(P + s, Q);
    P = a * Q - P;
    Q = (D - P * P) / Q;
    return a;
  }
};

}  // namespace detail

/// Continued fraction of sqrt D (integral ring) or (1 + sqrt D)/2.
inline ContinuedFraction continued_fraction(const QuadraticField& field) {
  detail::CfWalker w(field);
  ContinuedFraction out;
  out.first = w.step();
  const Int P1 = w.P, Q1 = w.Q;
  do {
    out.period.push_back(w.step());
  } while (!(w.P == P1 && w.Q == Q1));
  return out;
}

inline std::size_t cf_period_length(const QuadraticField& field) {
  detail::CfWalker w(field);
  w.step();
  const Int P1 = w.P, Q1 = w.Q;
  std::size_t len = 0;
  do {
    w.step();
    ++len;
  } while (!(w.P == P1 && w.Q == Q1));
  return len;
}

/// Smallest unit > 1 of O_K: the first convergent whose associated
/// element has norm +-1.
inline QuadInt fundamental_unit(const QuadraticField& field) {
  detail::CfWalker w(field);
  Int h1 = 1, h2 = 0, k1 = 0, k2 = 1;
  for (;;) {
    const Int a = w.step();
    const Int h = a * h1 + h2;
    const Int k = a * k1 + k2;
    h2 = h1;
    h1 = h;
    k2 = k1;
    k1 = k;
    QuadInt cand = field.half_integral() ? QuadInt(field, 2 * h - k, k, 2) : QuadInt(field, h, k, 1);
    if (abs(cand.norm()) == 1) return cand;
  }
}

/// Norm of the fundamental unit, read off the parity of the period length.
inline int unit_norm_sign(const QuadraticField& field) { return cf_period_length(field) % 2 == 1 ? -1 : 1; }

struct UnitIndex {
  int sign = 1;
  long k = 0;
  friend bool operator==(const UnitIndex&, const UnitIndex&) = default;
};

/// (sign, k) with t = sign * eps^k.
inline UnitIndex unit_index(const QuadInt& t, const QuadInt& eps) {
  if (!t.is_unit()) fail(ErrorKind::not_a_unit, t.str() + " is not a unit");
  if (!eps.is_unit()) fail(ErrorKind::not_a_unit, eps.str() + " is not a unit");
  const QuadInt one = QuadInt::from_int(t.field(), 1);
  if ((eps - one).sign() <= 0) fail(ErrorKind::invalid_argument, "eps must exceed 1");

  UnitIndex out;
  out.sign = t.sign();
  QuadInt cur = t * Int(out.sign);
  const long double ratio = detail::log_unit(cur) / detail::log_unit(eps);
  long k0 = std::lround(static_cast<double>(ratio));
  cur *= eps.pow(-k0);
  out.k = k0;
  const QuadInt eps_inv = eps.unit_inverse();
  // estimate is within a few steps; walk the rest
  for (int guard = 0; guard < 1000000; ++guard) {
    const int s = (cur - one).sign();
    if (s == 0) return out;
    if (s > 0) {
      const QuadInt next = cur * eps_inv;
      if ((next - one).sign() < 0) break;
      cur = next;
      ++out.k;
    } else {
      cur *= eps;
      --out.k;
    }
  }
  fail(ErrorKind::invalid_argument, t.str() + " is not a power of " + eps.str());
}

// ---------------------------------------------------------------------------
// The family Q(sqrt(m^2 p^(2r) + 1))

struct FamilyField {
  Int p;
  unsigned r = 0;
  Int m;
  Int N;  // m^2 p^(2r) + 1 = b^2 D
  Int b;
  Int D;
  QuadraticField field;
  QuadInt t;  // m p^r + b sqrt D, norm -1
  Factorization factorization;

  bool is_d2_exception() const { return D == 2; }
};

using Factorizer = std::function<Factorization(const Int&, unsigned long)>;

struct FamilyOptions {
  unsigned long factor_effort = kDefaultFactorEffort;
  Factorizer factorizer;  // defaults to qfam::factor
};

inline void require_odd_prime(const Int& p) {
  if (p < 3 || !is_prime(p)) fail(ErrorKind::invalid_argument, "p must be an odd prime, got " + to_dec(p));
}

inline FamilyField construct_family(const Int& p, unsigned r, const Int& m, const FamilyOptions& opts = {}) {
  require_odd_prime(p);
  if (r < 2) fail(ErrorKind::invalid_argument, "r must be >= 2");
  if (m < 1) fail(ErrorKind::invalid_argument, "m must be positive");
  if (gcd_int(p, m) != 1) fail(ErrorKind::invalid_argument, "gcd(p, m) must be 1");

  const Int mpr = m * pow_int(p, r);
  const Int N = mpr * mpr + 1;
  Factorization f = opts.factorizer ? opts.factorizer(N, opts.factor_effort) : factor(N, opts.factor_effort);
  if (!f.complete) {
    fail(ErrorKind::cannot_certify, "factorization of N = " + to_dec(N) + " incomplete (cofactor " +
                                        to_dec(f.cofactor) + ")");
  }
  const auto parts = squarefree_from(f);
  // N = s^2 would force (s - mp^r)(s + mp^r) = 1
  if (parts.D == 1) fail(ErrorKind::defect, "m^2 p^(2r) + 1 is a perfect square");

  const QuadraticField field = QuadraticField::certified(parts.D);
  QuadInt t(field, mpr, parts.b, 1);
  if (t.norm() != -1) fail(ErrorKind::defect, "family unit " + t.str() + " does not have norm -1");
  if (jacobi(parts.D, p) != 1) fail(ErrorKind::defect, "p does not split in Q(sqrt " + to_dec(parts.D) + ")");
  return FamilyField{p, r, m, N, parts.b, parts.D, field, std::move(t), std::move(f)};
}

/// (1 + C(p^(r-1), 2)) p^(p^(r-1) - r) / 2^(p^(r-1)), exactly.
inline Rational m_bound(const Int& p, unsigned r) {
  require_odd_prime(p);
  if (r < 2) fail(ErrorKind::invalid_argument, "r must be >= 2");
  const Int q = pow_int(p, r - 1);
  if (q > 200'000) fail(ErrorKind::too_large, "p^(r-1) too large for an exact bound");
  const unsigned long qi = q.get_ui();
  const Int binom = q * (q - 1) / 2;
  Rational out(Int((1 + binom) * pow_int(p, qi - r)), pow_ui(2, qi));
  out.canonicalize();
  return out;
}

/// m <= m_bound(p, r), decided exactly; huge bounds are settled by a
/// conservative bit-length comparison without forming the rational.
inline bool m_bound_satisfied(const Int& p, unsigned r, const Int& m) {
  require_odd_prime(p);
  if (r < 2) fail(ErrorKind::invalid_argument, "r must be >= 2");
  const Int q = pow_int(p, r - 1);
  const long double lp = std::log2(static_cast<long double>(p.get_d()));
  // bound >= (p/2)^q / p^r
  const long double lower_bits = static_cast<long double>(q.get_d()) * (lp - 1.0L) - r * lp - 4.0L;
  if (lower_bits > static_cast<long double>(bit_length(m)) + 4.0L) return true;
  return Rational(m) <= m_bound(p, r);
}

}  // namespace qfam
