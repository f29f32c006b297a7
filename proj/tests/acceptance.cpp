// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <qfam/qfam.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"

#ifndef QFAM_CLI
#error "QFAM_CLI must name the CLI binary"
#endif

using namespace qfam;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few mismatches; pass flips on the first one.
struct Check {
  Outcome out;
  int shown = 0;
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    out.pass = false;
    if (shown++ < 3) out.detail += (out.detail.empty() ? "" : "; ") + what;
  }
};

std::string cell(long p, unsigned r, const Int& m) {
  return "(" + std::to_string(p) + "," + std::to_string(r) + "," + to_dec(m) + ")";
}

// Family units gathered while walking the grid, reused by the Fibonacci check.
struct GridUnit {
  QuadInt t;
  Int p;
};
std::vector<GridUnit> grid_units;
bool grid_complete = false;

// ---------------------------------------------------------------------------

constexpr long kPrefixM = 5000;  // m checked per cell whose bound is out of reach

Outcome criterion1() {
  Check c;
  FactorCache memo;  // in memory: lets the verdict reuse the factorization
  AnalysisOptions opts;
  opts.classno_ceiling = 1'000'000;  // h only sharpens the ledger; v_p(h) >= 0 is used above this
  opts.family.factorizer = memo.factorizer();

  std::ostringstream full, partial;
  std::size_t fields = 0;
  grid_complete = true;
  for (long p : {3, 5, 7, 11}) {
    for (unsigned r : {2u, 3u, 4u}) {
      // exhaustive when the bound is below this, else a prefix
      const Int exhaustive_limit = 300'000;
      const bool reachable = m_bound_satisfied(Int(p), r, exhaustive_limit) == false;
      const long m_stop = reachable ? exhaustive_limit.get_si() : kPrefixM;
      long count = 0;
      for (long m = 1; m <= m_stop; ++m) {
        if (m % p == 0) continue;
        const Int M(m);
        if (!m_bound_satisfied(Int(p), r, M)) break;
        try {
          const auto fam = construct_family(Int(p), r, M, opts.family);
          const QuadInt eps = fundamental_unit(fam.field);
          c.expect(epsilon_congruence_check(fam, eps), "congruence fails at " + cell(p, r, M));
          c.expect(p_rationality_verdict(Int(p), r, M, opts) == PRationality::non_p_rational,
                   "verdict not non-p-rational at " + cell(p, r, M));
          grid_units.push_back({fam.t, fam.p});
        } catch (const Error& e) {
          c.expect(false, cell(p, r, M) + " " + e.what());
        }
        ++count;
      }
      fields += static_cast<std::size_t>(count);
      const std::string tag = "(" + std::to_string(p) + "," + std::to_string(r) + ")";
      if (reachable) {
        full << tag << " all " << count << " m; ";
      } else {
        grid_complete = false;
        const auto bound = m_bound(Int(p), r);
        const Int whole = bound.get_num() / bound.get_den();
        partial << tag << " m<=" << kPrefixM << " of bound with " << mpz_sizeinbase(whole.get_mpz_t(), 10)
                << " digits; ";
      }
    }
  }
  std::ostringstream detail;
  detail << fields << " fields checked, no mismatch found: " << full.str();
  if (!grid_complete) {
    detail << "NOT ENUMERABLE, prefix only: " << partial.str();
  }
  c.out.detail = c.out.pass ? detail.str() : c.out.detail;
  if (!grid_complete) c.out.pass = false;
  return c.out;
}

Outcome criterion2() {
  Check c;
  for (long p : {3, 5, 7}) {
    for (unsigned r = 2; r <= 5; ++r) {
      const auto fam = construct_family(Int(p), r, Int(1));
      const QuadInt eps = fundamental_unit(fam.field);
      c.expect(unit_index(fam.t, eps) == UnitIndex{1, 1}, "t not fundamental at " + cell(p, r, Int(1)));
      // independent: t has no proper root in O_K
      c.expect(oracle::unit_has_no_proper_root(fam.D, fam.t.u(), fam.t.v(), fam.t.den()),
               "root oracle finds a root of t at " + cell(p, r, Int(1)));
    }
  }
  if (c.out.pass) c.out.detail = "12 fields, unit_index = (+1, 1) and the root oracle agrees";
  return c.out;
}

// nu(t^(p-1) - 1) at the prime with b s = 1 (mod p), from exact coefficients
// and an exhaustively found square root of D.
unsigned long n2_oracle(const FamilyField& fam) {
  const long p = fam.p.get_si();
  const unsigned long k = fam.r + 2;
  const auto pk = static_cast<std::uint64_t>(pow_int(fam.p, k).get_ui());
  const auto Dmod = static_cast<std::uint64_t>(mod_floor(fam.D, Int(pk)).get_ui());
  const auto binv = *mod_inverse(fam.b, fam.p);
  std::uint64_t s = 0;
  for (auto root : oracle::sqrt_mod_exhaustive(Dmod, pk)) {
    if (Int(root % p) == binv) s = root;
  }
  const auto e = oracle::power_naive({fam.t.u(), fam.t.v()}, static_cast<unsigned>(p - 1), fam.D);
  const Int img = mod_floor(e.a + e.b * Int(s) - 1, Int(pk));
  return sgn(img) == 0 ? k : valuation(img, fam.p);
}

Outcome criterion3() {
  Check c;
  for (long p : {3, 5, 7}) {
    for (unsigned r = 2; r <= 5; ++r) {
      const auto fam = construct_family(Int(p), r, Int(1));
      const auto n2 = n2_of(fam);
      c.expect(n2 == r, "n2 = " + std::to_string(n2) + " at " + cell(p, r, Int(1)));
      c.expect(n2_oracle(fam) == r, "oracle disagrees at " + cell(p, r, Int(1)));
    }
  }
  if (c.out.pass) c.out.detail = "12 fields, n2 = r by the library and by exhaustive-root oracle";
  return c.out;
}

long double regulator(std::uint64_t D) {
  if (const auto u = oracle::brute_fundamental_unit(D, 2'000'000)) {
    return std::log((u->x + u->y * std::sqrt(static_cast<long double>(D))) / u->den);
  }
  const QuadraticField f{Int(D)};
  const QuadInt eps = fundamental_unit(f);
  if (abs(eps.norm()) != 1 || !oracle::unit_has_no_proper_root(f.D(), eps.u(), eps.v(), eps.den())) return -1;
  return std::log((eps.u().get_d() + eps.v().get_d() * std::sqrt(static_cast<long double>(D))) / eps.den());
}

Outcome criterion4() {
  Check c;
  int verdicts = 0, skipped = 0, divisible = 0;
  for (long p : {3, 5, 7, 11}) {
    c.expect(!is_wieferich(Int(p)), std::to_string(p) + " is Wieferich");
    for (unsigned r = 2; r <= 5; ++r) {
      const auto fam = construct_family(Int(p), r, Int(1));
      c.expect(lemma_n1_congruence(fam), "n1 congruence fails at " + cell(p, r, Int(1)));
      const auto h = try_class_number(fam.field, kDefaultClassnoCeiling);
      if (!h) {
        ++skipped;
        continue;
      }
      if (mpz_divisible_p(h->get_mpz_t(), fam.p.get_mpz_t())) {
        ++divisible;
        continue;
      }
      const auto g = greenberg_verdict(Int(p), r);
      ++verdicts;
      c.expect(g.verdict == Greenberg::mu_lambda_zero, "verdict inconclusive at " + cell(p, r, Int(1)) + ": " + g.reason);
      c.expect(g.an_prediction && *g.an_prediction == pow_int(Int(p), r - 1), "prediction wrong at " + cell(p, r, Int(1)));
    }
  }
  const auto f = construct_family(Int(3), 2, Int(1));
  c.expect(f.D == 82, "D != 82");
  c.expect(class_number(f.field) == 4, "h(82) != 4");
  c.expect(narrow_class_number(328) == 4, "cycle count on 328 != 4");
  c.expect(oracle::analytic_class_number(82, regulator(82)) == 4, "analytic h(82) != 4");
  const auto g = greenberg_verdict(Int(3), 2);
  c.expect(g.verdict == Greenberg::mu_lambda_zero && g.an_prediction == Int(3), "(3,2) verdict or prediction wrong");
  if (c.out.pass) {
    c.out.detail = "16 n1 congruences; " + std::to_string(verdicts) + " mu-lambda-zero verdicts with p^(r-1); " +
                   std::to_string(divisible) + " with p | h; " + std::to_string(skipped) +
                   " above the class-number ceiling; (3,2): D=82 h=4 prediction 3";
  }
  return c.out;
}

Outcome criterion5() {
  Check c;
  int fields = 0;
  for (std::uint64_t D = 2; D <= 200; ++D) {
    if (!oracle::squarefree_td(D)) continue;
    ++fields;
    const Int h = class_number(QuadraticField(Int(D)));
    const long reg = oracle::analytic_class_number(D, regulator(D));
    c.expect(h == reg, "D=" + std::to_string(D) + ": " + to_dec(h) + " vs " + std::to_string(reg));
  }
  for (auto [D, h] : std::vector<std::pair<long, long>>{{2, 1}, {10, 2}, {82, 4}}) {
    c.expect(class_number(QuadraticField(Int(D))) == h, "spot value D=" + std::to_string(D));
    c.expect(oracle::analytic_class_number(static_cast<std::uint64_t>(D), regulator(static_cast<std::uint64_t>(D))) == h,
             "oracle spot value D=" + std::to_string(D));
  }
  if (c.out.pass) c.out.detail = std::to_string(fields) + " squarefree D <= 200 agree with the analytic formula";
  return c.out;
}

Outcome criterion6() {
  Check c;
  for (const auto& g : grid_units) c.expect(fib_unit_equivalence(g.t, g.p), "disagreement at " + g.t.str());
  std::string cov = std::to_string(grid_units.size()) + " family units, all three routes agree";
  if (!grid_complete) {
    c.out.pass = false;
    cov += "; NOT ENUMERABLE: the grid of criterion 1 is only partially covered";
  }
  if (c.shown == 0) c.out.detail = cov;
  return c.out;
}

Outcome criterion7() {
  Check c;
  int cases = 0;
  for (auto [D, u] : std::vector<std::pair<long, long>>{{82, 9}, {626, 25}, {2, 1}}) {
    const QuadraticField f{Int(D)};
    const QuadInt eps(f, Int(u), Int(1));
    c.expect(fundamental_unit(f) == eps, "unexpected fundamental unit for D=" + std::to_string(D));
    for (long p : {3, 5, 7}) {
      if (D % p == 0 || jacobi(Int(D), Int(p)) != 1) continue;
      const auto emb = make_embedding(f, Int(p), 2);
      const unsigned long base = unit_congruence_order(eps, emb);
      c.expect(base == unit_congruence_order(eps, emb.conjugate()), "branch dependence D=" + std::to_string(D));
      for (long k = 1; k <= 10; ++k) {
        if (std::gcd(k, p) != 1) continue;
        for (int s : {1, -1}) {
          const QuadInt x = eps.pow(k) * Int(s);
          ++cases;
          c.expect(unit_congruence_order(x, emb) == base, "transfer fails D=" + std::to_string(D) + " k=" + std::to_string(k));
          c.expect(unit_congruence_order(x, emb.conjugate()) == base, "conjugate transfer fails");
        }
      }
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(cases) + " signed powers on both primes above p";
  return c.out;
}

Outcome criterion8() {
  Check c;
  bool saw_equal = false, saw_differ = false;
  for (unsigned long l = 1; l <= 300; ++l) {
    for (unsigned long m = 1; m <= 300; ++m) {
      (two_adic(l) == two_adic(m) ? saw_equal : saw_differ) = true;
      c.expect(g_gcd(l, m) == g_gcd_oracle(l, m), "gcd mismatch at " + std::to_string(l) + "," + std::to_string(m));
    }
  }
  c.expect(saw_equal && saw_differ, "a 2-valuation branch was not exercised");
  for (long l = -100; l <= 100; ++l) {
    for (long m = -100; m <= 100; ++m) c.expect(addition_identity_check(l, m), "addition identity fails");
  }
  for (long n = -1000; n <= 1000; ++n) {
    const auto pp = pell_pair(n);
    c.expect(pp.G * pp.G - 2 * pp.F * pp.F == (n % 2 ? -1 : 1), "norm identity fails at n=" + std::to_string(n));
  }
  if (c.out.pass) c.out.detail = "90000 gcd pairs, 40401 addition identities, 2001 norm identities";
  return c.out;
}

Outcome criterion9() {
  Check c;
  int primes = 0;
  for (long p = 3; p <= 97; ++p) {
    if (!oracle::is_prime_td(static_cast<std::uint64_t>(p))) continue;
    ++primes;
    try {
      const auto hits = prime_power_search(Int(p), 2000);
      c.expect(hits.empty(), "solution found for p=" + std::to_string(p));
    } catch (const Error& e) {
      c.expect(false, e.what());
    }
  }
  if (c.out.pass) c.out.detail = std::to_string(primes) + " primes, no G_n = p^r with n <= 2000";
  return c.out;
}

Outcome criterion10() {
  Check c;
  std::vector<long> found;
  for (std::uint64_t p = 3; p < 10'000; p += 2) {
    if (!oracle::is_prime_td(p)) continue;
    const bool w = is_wieferich(Int(p));
    c.expect(w == oracle::wieferich_direct(p), "oracle disagrees at " + std::to_string(p));
    if (w) found.push_back(static_cast<long>(p));
  }
  c.expect(found == std::vector<long>{1093, 3511}, "unexpected Wieferich set");
  if (c.out.pass) c.out.detail = "exactly {1093, 3511} below 10^4";
  return c.out;
}

std::string run_capture(const std::string& cmd, int& status) {
  std::string out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    status = -1;
    return out;
  }
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  status = pclose(pipe);
  return out;
}

std::string data_rows(const std::string& csv) {
  std::istringstream in(csv);
  std::string line, out;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') out += line + "\n";
  }
  return out;
}

Outcome criterion11() {
  Check c;
  const std::string base = std::string("\"") + QFAM_CLI + "\" scan --p 3 --r 2..6 --m one 2>/dev/null";
  int s1 = 0, s8 = 0;
  const auto one = run_capture(base + " --jobs 1", s1);
  const auto eight = run_capture(base + " --jobs 8", s8);
  c.expect(s1 == 0 && s8 == 0, "scan exited non-zero");
  const auto rows = data_rows(one);
  c.expect(!rows.empty() && rows == data_rows(eight), "data rows differ between --jobs 1 and --jobs 8");
  c.expect(std::count(rows.begin(), rows.end(), '\n') == 6, "expected a header and 5 rows");
  if (c.out.pass) c.out.detail = "header + 5 rows byte-identical across --jobs 1 and --jobs 8";
  return c.out;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"non-p-rationality grid", criterion1},        {"family unit is fundamental", criterion2},
      {"n2 = r", criterion3},                        {"n1 congruence and Greenberg verdicts", criterion4},
      {"class-number oracle equivalence", criterion5}, {"Fibonacci to units equivalence", criterion6},
      {"unit order transfer and branch independence", criterion7},
      {"Pell pair divisibility and identities", criterion8},
      {"no prime-power terms G_n = p^r", criterion9}, {"Wieferich gate", criterion10},
      {"scan determinism across job counts", criterion11},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu (%s) [%.2fs]: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed ? 1 : 0;
}
