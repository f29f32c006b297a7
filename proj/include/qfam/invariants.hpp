#pragma once

// Verdict layer for the family Q(sqrt(m^2 p^(2r) + 1)): the unit
// congruence, the Fukuda-Komatsu invariants n1 and n2, the generalized
// Fibonacci criterion, the Coates valuation ledger, non-p-rationality and
// Greenberg verdicts.

#include <qfam/bigint.hpp>
#include <qfam/classno.hpp>
#include <qfam/error.hpp>
#include <qfam/intkit.hpp>
#include <qfam/padic.hpp>
#include <qfam/quadfield.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qfam {

enum class Tri { certified, refuted, unknown };
enum class PRationality { non_p_rational, inconclusive };
enum class Greenberg { mu_lambda_zero, inconclusive };

inline const char* to_string(Tri t) {
  switch (t) {
    case Tri::certified: return "certified";
    case Tri::refuted: return "refuted";
    case Tri::unknown: return "unknown";
  }
  return "unknown";
}
inline const char* to_string(PRationality v) {
  return v == PRationality::non_p_rational ? "non-p-rational" : "inconclusive";
}
inline const char* to_string(Greenberg v) { return v == Greenberg::mu_lambda_zero ? "mu-lambda-zero" : "inconclusive"; }

struct AnalysisOptions {
  unsigned long precision_cap = kDefaultPrecisionCap;
  std::int64_t classno_ceiling = kDefaultClassnoCeiling;
  FamilyOptions family;
};

namespace detail {

// x^e = 1 modulo the square of the prime selected by emb.
inline bool power_is_one_mod_prime_sq(const QuadInt& x, const Int& e, const SplitPrimeEmbedding& emb) {
  const auto e2 = emb.with_precision(2);
  return modpow(embed(x, e2), e, e2.modulus()) == 1;
}

}  // namespace detail

/// eps^(p-1) = 1 (mod p^2 O_K), evaluated in O_K / p^2.
inline bool epsilon_congruence_check(const FamilyField& fam, const QuadInt& eps) {
  return power_is_one_mod(eps, fam.p - 1, fam.p * fam.p);
}

inline bool epsilon_congruence_check(const FamilyField& fam) {
  return epsilon_congruence_check(fam, fundamental_unit(fam.field));
}

/// n2 = nu(eps^(p-1) - 1) at the primary prime of the family.
inline unsigned long n2_of(const FamilyField& fam, const QuadInt& eps, unsigned long cap = kDefaultPrecisionCap) {
  const auto emb = family_embedding(fam, std::min<unsigned long>(cap, fam.r + 2));
  const unsigned long n2 = unit_congruence_order(eps, emb, cap);
  if (fam.m == 1 && !fam.is_d2_exception() && n2 != fam.r) {
    fail(ErrorKind::defect, "n2 = " + std::to_string(n2) + " differs from r = " + std::to_string(fam.r));
  }
  return n2;
}

inline unsigned long n2_of(const FamilyField& fam, unsigned long cap = kDefaultPrecisionCap) {
  return n2_of(fam, fundamental_unit(fam.field), cap);
}

/// (b sqrt D + 1)^(p-1) = 2^(p-1) (mod P^2) for the m = 1 family.
inline bool lemma_n1_congruence(const FamilyField& fam) {
  if (fam.m != 1) fail(ErrorKind::precondition_violated, "lemma_n1_congruence requires m = 1");
  const auto emb = family_embedding(fam, 2);
  const QuadInt alpha(fam.field, 1, fam.b, 1);
  return modpow(embed(alpha, emb), fam.p - 1, emb.modulus()) == modpow(Int(2), fam.p - 1, emb.modulus());
}

/// Certificate that n1 = 1 for the m = 1 family: p does not divide h,
/// eps^(p-1) = 1 and (b sqrt D + 1)^(p-1) != 1 modulo P^2.
inline Tri n1_certificate(const FamilyField& fam, const QuadInt& eps, const std::optional<Int>& h) {
  if (fam.m != 1) fail(ErrorKind::precondition_violated, "the n1 certificate is proven only for m = 1");
  if (!h || mpz_divisible_p(h->get_mpz_t(), fam.p.get_mpz_t())) return Tri::unknown;
  const auto emb = family_embedding(fam, 2);
  const bool eps_one = detail::power_is_one_mod_prime_sq(eps, fam.p - 1, emb);
  const bool alpha_one = detail::power_is_one_mod_prime_sq(QuadInt(fam.field, 1, fam.b, 1), fam.p - 1, emb);
  if (alpha_one != is_wieferich(fam.p)) {
    fail(ErrorKind::defect, "(b sqrt D + 1)^(p-1) mod P^2 disagrees with the Wieferich test");
  }
  if (eps_one && !alpha_one) return Tri::certified;
  if (alpha_one) return Tri::refuted;
  return Tri::unknown;
}

/// F_0 = 0, F_1 = 1, F_(n+2) = trace * F_(n+1) + F_n.
inline Int fib_by_trace(const Int& trace, unsigned long n) {
  Int prev = 0, cur = 1;
  if (n == 0) return prev;
  for (unsigned long i = 1; i < n; ++i) {
    Int next = trace * cur + prev;
    prev = std::move(cur);
    cur = std::move(next);
  }
  return cur;
}

/// F_0 = 0, F_1 = 1, F_(n+2) = 2a F_(n+1) + F_n.
inline Int gen_fib(const Int& a, unsigned long n) { return fib_by_trace(2 * a, n); }

/// For t = a + b sqrt D of norm -1 with p | a: both sides of
/// t^(p-1) = 1 (mod p^2)  <=>  a = 0 (mod p^2), each computed on its own,
/// plus F_(p-1) = 0 (mod p^2) as a third route. True iff all three agree.
inline bool fib_unit_equivalence(const QuadInt& t, const Int& p) {
  require_odd_prime(p);
  if (t.norm() != -1) fail(ErrorKind::precondition_violated, "t must have norm -1");
  // a = u / den and den is a unit mod p
  if (!mpz_divisible_p(t.u().get_mpz_t(), p.get_mpz_t())) {
    fail(ErrorKind::precondition_violated, "p must divide the rational part of t");
  }
  const Int p2 = p * p;
  const bool unit_side = power_is_one_mod(t, p - 1, p2);
  const bool coefficient_side = valuation(t.u(), p) >= 2;
  const bool fib_side = mod_floor(fib_by_trace(t.trace(), p.get_ui() - 1), p2) == 0;
  return unit_side == coefficient_side && coefficient_side == fib_side;
}

// ---------------------------------------------------------------------------
// Coates ledger

struct LedgerEntry {
  std::string label;
  long contribution = 0;
  bool lower_bound = false;  // contribution is a certified lower bound only
};

struct CoatesLedger {
  std::vector<LedgerEntry> entries;
  long torsion_lower_bound = 0;
};

/// p-adic valuation ledger of w1 h R_p prod(1 - 1/N(P)) / sqrt(disc) for a
/// real quadratic field in which p splits. An absent h contributes >= 0.
inline CoatesLedger coates_ledger(const QuadraticField& field, const Int& p, const QuadInt& eps,
                                  const std::optional<Int>& h) {
  detail::require_split(field.D(), p);
  CoatesLedger out;
  out.entries.push_back({"w1(K(mu_p))", 1, false});
  out.entries.push_back({"euler factor (p-1)^2/p^2", -2, false});
  // nu(R_p) >= 2 iff eps^(p-1) = 1 (mod p^2); otherwise exactly 1
  const bool reg_two = power_is_one_mod(eps, p - 1, p * p);
  out.entries.push_back({"p-adic regulator", reg_two ? 2 : 1, reg_two});
  if (h) {
    out.entries.push_back({"class number", static_cast<long>(valuation(*h, p)), false});
  } else {
    out.entries.push_back({"class number", 0, true});
  }
  const long disc_val = static_cast<long>(valuation(field.disc(), p));
  out.entries.push_back({"sqrt discriminant", -disc_val / 2, false});
  for (const auto& e : out.entries) out.torsion_lower_bound += e.contribution;
  return out;
}

inline CoatesLedger coates_ledger(const FamilyField& fam, const QuadInt& eps, const std::optional<Int>& h) {
  return coates_ledger(fam.field, fam.p, eps, h);
}

inline PRationality p_rationality_from(const CoatesLedger& ledger) {
  return ledger.torsion_lower_bound >= 1 ? PRationality::non_p_rational : PRationality::inconclusive;
}

/// Class number under the ceiling, or nullopt when the ceiling is exceeded.
inline std::optional<Int> try_class_number(const QuadraticField& field, std::int64_t ceiling) {
  if (field.disc() > ceiling) return std::nullopt;
  return class_number(field, ceiling);
}

inline PRationality p_rationality_verdict(const Int& p, unsigned r, const Int& m, const AnalysisOptions& opts = {}) {
  const auto fam = construct_family(p, r, m, opts.family);
  const auto eps = fundamental_unit(fam.field);
  const auto verdict = p_rationality_from(coates_ledger(fam, eps, try_class_number(fam.field, opts.classno_ceiling)));
  if (verdict != PRationality::non_p_rational && m_bound_satisfied(p, r, m)) {
    fail(ErrorKind::defect, "field within the m-bound was not certified non-p-rational");
  }
  return verdict;
}

// ---------------------------------------------------------------------------
// Greenberg verdict

struct GreenbergResult {
  Greenberg verdict = Greenberg::inconclusive;
  std::string reason;  // failing condition when inconclusive
  std::optional<Int> an_prediction;
};

inline GreenbergResult greenberg_from(const FamilyField& fam, const QuadInt& eps, const std::optional<Int>& h,
                                      std::optional<unsigned long> n2) {
  if (fam.m != 1) return {Greenberg::inconclusive, "m != 1", std::nullopt};
  if (is_wieferich(fam.p)) return {Greenberg::inconclusive, "Wieferich", std::nullopt};
  if (!h) return {Greenberg::inconclusive, "class number uncomputed", std::nullopt};
  if (mpz_divisible_p(h->get_mpz_t(), fam.p.get_mpz_t())) return {Greenberg::inconclusive, "p divides h", std::nullopt};
  if (!n2) return {Greenberg::inconclusive, "n2 unresolved", std::nullopt};
  const Tri n1 = n1_certificate(fam, eps, h);
  if (n1 != Tri::certified) return {Greenberg::inconclusive, std::string("n1 ") + to_string(n1), std::nullopt};
  // |A_n| = |D_0| p^(n2 - 1) with |D_0| = 1 since p does not divide h
  return {Greenberg::mu_lambda_zero, "", pow_int(fam.p, *n2 - 1)};
}

inline GreenbergResult greenberg_verdict(const Int& p, unsigned r, const AnalysisOptions& opts = {}) {
  const auto fam = construct_family(p, r, Int(1), opts.family);
  const auto eps = fundamental_unit(fam.field);
  if (is_wieferich(p)) return {Greenberg::inconclusive, "Wieferich", std::nullopt};
  const auto h = try_class_number(fam.field, opts.classno_ceiling);
  return greenberg_from(fam, eps, h, n2_of(fam, eps, opts.precision_cap));
}

// ---------------------------------------------------------------------------
// Distinct radicands along r

struct DistinctRow {
  unsigned r = 0;
  std::optional<Int> D;
  std::string error;
};

struct DistinctScan {
  std::vector<DistinctRow> rows;
  std::vector<std::pair<unsigned, unsigned>> collisions;  // (r1, r2) with equal D
  std::vector<unsigned> d2_rows;
  bool distinct() const { return collisions.empty(); }
};

inline DistinctScan distinct_fields_scan(const Int& p, unsigned r_max, const FamilyOptions& opts = {}) {
  require_odd_prime(p);
  if (r_max < 2) fail(ErrorKind::invalid_argument, "r_max must be >= 2");
  DistinctScan out;
  for (unsigned r = 2; r <= r_max; ++r) {
    DistinctRow row{r, std::nullopt, ""};
    try {
      row.D = construct_family(p, r, Int(1), opts).D;
    } catch (const Error& e) {
      row.error = e.what();
    }
    if (row.D) {
      if (*row.D == 2) out.d2_rows.push_back(r);
      for (const auto& prev : out.rows) {
        if (prev.D && *prev.D == *row.D) out.collisions.emplace_back(prev.r, r);
      }
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full report

struct InvariantReport {
  FamilyField family;
  QuadInt eps;
  UnitIndex t_index{};
  bool t_is_fundamental = false;
  bool eps_congruence = false;
  bool m_bound_ok = false;
  std::optional<unsigned long> n2{};
  Tri n1_is_one = Tri::unknown;
  bool wieferich = false;
  std::optional<Int> class_number{};
  std::optional<unsigned long> h_val_p{};
  CoatesLedger ledger{};
  PRationality p_rational = PRationality::inconclusive;
  GreenbergResult greenberg{};
  std::vector<std::string> notes{};
};

/// Runs every check on one family field. Theorem-guaranteed results that
/// compute false raise a defect error.
inline InvariantReport analyze_family(FamilyField fam, const AnalysisOptions& opts = {}) {
  const QuadInt eps = fundamental_unit(fam.field);
  InvariantReport rep{.family = std::move(fam), .eps = eps};
  const auto& f = rep.family;

  rep.t_index = unit_index(f.t, eps);
  rep.t_is_fundamental = rep.t_index == UnitIndex{1, 1};
  rep.m_bound_ok = m_bound_satisfied(f.p, f.r, f.m);
  rep.wieferich = is_wieferich(f.p);
  rep.eps_congruence = epsilon_congruence_check(f, eps);
  if (rep.m_bound_ok && !rep.eps_congruence) {
    fail(ErrorKind::defect, "eps^(p-1) != 1 (mod p^2) although m is within the bound");
  }
  if (f.is_d2_exception()) rep.notes.push_back("D = 2 exceptional case");

  try {
    rep.n2 = n2_of(f, eps, opts.precision_cap);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::precision_exhausted) throw;
    rep.notes.push_back("precision exhausted");
  }

  rep.class_number = try_class_number(f.field, opts.classno_ceiling);
  if (rep.class_number) {
    rep.h_val_p = valuation(*rep.class_number, f.p);
  } else {
    rep.notes.push_back("class number ceiling");
  }

  if (f.m == 1) {
    if (!lemma_n1_congruence(f)) fail(ErrorKind::defect, "(b sqrt D + 1)^(p-1) != 2^(p-1) (mod P^2)");
    rep.n1_is_one = n1_certificate(f, eps, rep.class_number);
  } else {
    rep.notes.push_back("n1 certificate requires m = 1");
  }

  rep.ledger = coates_ledger(f, eps, rep.class_number);
  rep.p_rational = p_rationality_from(rep.ledger);
  if (rep.m_bound_ok && rep.p_rational != PRationality::non_p_rational) {
    fail(ErrorKind::defect, "field within the m-bound was not certified non-p-rational");
  }

  rep.greenberg = greenberg_from(f, eps, rep.class_number, rep.n2);
  if (rep.greenberg.verdict == Greenberg::inconclusive) rep.notes.push_back("greenberg: " + rep.greenberg.reason);
  return rep;
}

inline InvariantReport analyze(const Int& p, unsigned r, const Int& m, const AnalysisOptions& opts = {}) {
  return analyze_family(construct_family(p, r, m, opts.family), opts);
}

}  // namespace qfam
