#include <qfam/quadfield.hpp>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace qfam;

namespace {

QuadInt q(long D, long u, long v, int den = 1) { return QuadInt(QuadraticField(Int(D)), Int(u), Int(v), den); }

}  // namespace

TEST(QuadraticField, Validation) {
  EXPECT_THROW(QuadraticField(Int(1)), Error);
  EXPECT_THROW(QuadraticField(Int(9)), Error);
  EXPECT_THROW(QuadraticField(Int(12)), Error);
  EXPECT_EQ(QuadraticField(Int(82)).disc(), 328);
  EXPECT_EQ(QuadraticField(Int(5)).disc(), 5);
  EXPECT_TRUE(QuadraticField(Int(13)).half_integral());
  EXPECT_FALSE(QuadraticField(Int(3)).half_integral());
}

TEST(QuadInt, Products) {
  EXPECT_EQ(q(2, 1, 1) * q(2, 1, 1), q(2, 3, 2));
  EXPECT_EQ(q(82, 9, 1) * q(82, 9, -1), q(82, -1, 0));
  EXPECT_EQ(q(5, 1, 1, 2) * q(5, 1, 1, 2), q(5, 3, 1, 2));
}

TEST(QuadInt, Norms) {
  EXPECT_EQ(q(82, 9, 1).norm(), -1);
  EXPECT_EQ(q(13, 18, 5).norm(), -1);
  EXPECT_EQ(q(5, 1, 1, 2).norm(), -1);
}

TEST(QuadInt, RejectsElementsOutsideTheRing) {
  const QuadraticField f3(Int(3)), f5(Int(5));
  EXPECT_THROW(QuadInt(f3, Int(1), Int(1), 2), Error);
  EXPECT_THROW(QuadInt(f5, Int(1), Int(2), 2), Error);
  EXPECT_EQ(QuadInt(f5, Int(2), Int(4), 2), q(5, 1, 2));
}

TEST(QuadInt, NormIsMultiplicative) {
  for (long D : {2, 3, 5, 13, 21, 82}) {
    const QuadraticField f{Int(D)};
    const int den = f.half_integral() ? 2 : 1;
    for (long a = -7; a <= 7; ++a) {
      for (long b = -7; b <= 7; ++b) {
        if (den == 2 && (a - b) % 2 != 0) continue;
        const QuadInt x(f, Int(a), Int(b), den);
        const QuadInt y(f, Int(b + 3), Int(a - 1));
        EXPECT_EQ((x * y).norm(), x.norm() * y.norm());
        EXPECT_EQ(x * x.conj(), QuadInt::from_int(f, x.norm()));
      }
    }
  }
}

TEST(QuadInt, SignIsExact) {
  // 665857 / 470832 is a very close approximation of sqrt 2
  EXPECT_EQ(q(2, 665857, -470832).sign(), 1);
  EXPECT_EQ(q(2, -665857, 470832).sign(), -1);
  EXPECT_EQ(q(2, 0, 0).sign(), 0);
}

TEST(FundamentalUnit, Examples) {
  EXPECT_EQ(fundamental_unit(QuadraticField(Int(2))), q(2, 1, 1));
  EXPECT_EQ(fundamental_unit(QuadraticField(Int(82))), q(82, 9, 1));
  EXPECT_EQ(fundamental_unit(QuadraticField(Int(5))), q(5, 1, 1, 2));
  EXPECT_EQ(unit_norm_sign(QuadraticField(Int(2))), -1);
  EXPECT_EQ(unit_norm_sign(QuadraticField(Int(3))), 1);
  EXPECT_EQ(unit_norm_sign(QuadraticField(Int(82))), -1);
}

TEST(FundamentalUnit, ContinuedFractionOfSqrt82) {
  const auto cf = continued_fraction(QuadraticField(Int(82)));
  EXPECT_EQ(cf.first, 9);
  EXPECT_EQ(cf.period, std::vector<Int>{18});
}

TEST(FundamentalUnit, MatchesBrutePellSearch) {
  for (std::uint64_t D = 2; D <= 300; ++D) {
    if (!oracle::squarefree_td(D)) continue;
    const auto brute = oracle::brute_fundamental_unit(D, 2'000'000);
    if (!brute) continue;  // a handful of radicands have huge units
    const QuadraticField f{Int(D)};
    const QuadInt eps = fundamental_unit(f);
    EXPECT_EQ(eps, QuadInt(f, Int(brute->x), Int(brute->y), brute->den)) << D;
    EXPECT_EQ(unit_norm_sign(f), brute->norm) << D;
    EXPECT_EQ(eps.norm(), brute->norm) << D;
  }
}

TEST(UnitIndex, Examples) {
  const QuadInt e2 = q(2, 1, 1);
  EXPECT_EQ(unit_index(q(2, 3, 2), e2), (UnitIndex{1, 2}));
  EXPECT_EQ(unit_index(q(2, -1, 1), e2), (UnitIndex{1, -1}));
  EXPECT_EQ(unit_index(q(82, 9, 1), q(82, 9, 1)), (UnitIndex{1, 1}));
  EXPECT_THROW(unit_index(q(2, 3, 1), e2), Error);
  EXPECT_THROW(unit_index(q(2, 3, 2), q(2, 3, 2).pow(1) * q(2, 1, 1)), Error);
}

TEST(UnitIndex, RecoversSignedPowers) {
  for (long D : {2, 5, 13, 82, 94}) {
    const QuadraticField f{Int(D)};
    const QuadInt eps = fundamental_unit(f);
    for (long k = -25; k <= 25; ++k) {
      for (int s : {1, -1}) {
        EXPECT_EQ(unit_index(eps.pow(k) * Int(s), eps), (UnitIndex{s, k})) << D << " " << k;
      }
    }
  }
}

TEST(ConstructFamily, Examples) {
  auto fam = construct_family(Int(3), 2, Int(1));
  EXPECT_EQ(fam.N, 82);
  EXPECT_EQ(fam.b, 1);
  EXPECT_EQ(fam.D, 82);
  EXPECT_EQ(fam.t, q(82, 9, 1));
  fam = construct_family(Int(3), 2, Int(2));
  EXPECT_EQ(fam.N, 325);
  EXPECT_EQ(fam.b, 5);
  EXPECT_EQ(fam.D, 13);
  EXPECT_EQ(fam.t, q(13, 18, 5));
  fam = construct_family(Int(3), 3, Int(1));
  EXPECT_EQ(fam.D, 730);
  EXPECT_EQ(fam.t, q(730, 27, 1));
}

TEST(ConstructFamily, Validation) {
  EXPECT_THROW(construct_family(Int(2), 2, Int(1)), Error);
  EXPECT_THROW(construct_family(Int(9), 2, Int(1)), Error);
  EXPECT_THROW(construct_family(Int(3), 1, Int(1)), Error);
  EXPECT_THROW(construct_family(Int(3), 2, Int(3)), Error);
  EXPECT_THROW(construct_family(Int(3), 2, Int(0)), Error);
}

TEST(ConstructFamily, IncompleteFactorizationCannotCertify) {
  try {
    construct_family(Int(3), 20, Int(1), FamilyOptions{1, {}});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::cannot_certify);
  }
}

TEST(ConstructFamily, Properties) {
  for (long p : {3, 5, 7, 11}) {
    for (unsigned r = 2; r <= 4; ++r) {
      for (long m = 1; m <= 12; ++m) {
        if (m % p == 0) continue;
        const auto fam = construct_family(Int(p), r, Int(m));
        EXPECT_EQ(fam.b * fam.b * fam.D, fam.N);
        EXPECT_EQ(fam.t.norm(), -1);
        if (fam.D < 1'000'000) {
          EXPECT_TRUE(oracle::squarefree_td(fam.D.get_ui()));
        }
        EXPECT_EQ(jacobi(fam.D, fam.p), 1);
      }
    }
  }
}

TEST(MBound, ExactValues) {
  EXPECT_EQ(m_bound(Int(3), 2), Rational(3, 2));
  EXPECT_EQ(m_bound(Int(3), 3), Rational(26973, 512));
  EXPECT_EQ(m_bound(Int(5), 2), Rational(1375, 32));
  EXPECT_TRUE(m_bound_satisfied(Int(3), 2, Int(1)));
  EXPECT_FALSE(m_bound_satisfied(Int(3), 2, Int(2)));
  EXPECT_TRUE(m_bound_satisfied(Int(3), 3, Int(52)));
  EXPECT_FALSE(m_bound_satisfied(Int(3), 3, Int(53)));
  EXPECT_TRUE(m_bound_satisfied(Int(5), 2, Int(42)));
  EXPECT_FALSE(m_bound_satisfied(Int(5), 2, Int(43)));
}

TEST(MBound, ShortcutAgreesWithExactComparison) {
  for (long p : {3, 5, 7, 11, 13}) {
    for (unsigned r = 2; r <= 4; ++r) {
      if (pow_int(Int(p), r - 1) > 200'000) continue;
      const Rational bound = m_bound(Int(p), r);
      for (const Int& m : {Int(1), Int(2), Int(50), Int(10'000), Int("1000000000000"), Int("1" + std::string(60, '0'))}) {
        EXPECT_EQ(m_bound_satisfied(Int(p), r, m), Rational(m) <= bound) << p << " " << r << " " << m;
      }
    }
  }
}
