#include <random>

#include <gtest/gtest.h>

#include "isp/scalar.hpp"

using isp::Int;
using isp::Scalar;

namespace {

// Random rational with a random power-of-two factor; mpq_class is the oracle.
struct Sample {
  Scalar s;
  mpq_class q;
};

Sample random_sample(std::mt19937_64& rng, bool dyadic) {
  const long e = static_cast<long>(rng() % 121) - 60;
  long num = dyadic ? 1 : static_cast<long>(rng() % 2000) + 1;
  const long den = dyadic ? 1 : static_cast<long>(rng() % 999) + 1;
  if (rng() % 2) num = -num;
  mpq_class q(num, den);
  q.canonicalize();
  if (e >= 0) {
    mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(e));
  } else {
    mpq_div_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(-e));
  }
  return {Scalar::scaled(Int(num), Int(den), Int(e)), q};
}

}  // namespace

TEST(Scalar, CanonicalForm) {
  const Scalar a = Scalar::fraction(Int(12), Int(-8));
  EXPECT_EQ(a.str(), "-3*2^-1");
  EXPECT_EQ(a.numerator(), -3);
  EXPECT_EQ(a.denominator(), 2);
  EXPECT_EQ(Scalar(8).str(), "2^3");
  EXPECT_TRUE(Scalar(8).is_dyadic());
  EXPECT_EQ(Scalar(1).str(), "1");
  EXPECT_EQ(Scalar(0).str(), "0");
  EXPECT_EQ(Scalar::fraction(Int(2), Int(6)).str(), "1/3");
  EXPECT_THROW(Scalar::fraction(Int(1), Int(0)), std::domain_error);
}

TEST(Scalar, ExactIdentities) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 2000; ++t) {
    const Scalar a = random_sample(rng, false).s;
    Scalar b = random_sample(rng, t % 3 == 0).s;
    EXPECT_EQ((a + b) - b, a);
    EXPECT_EQ((a * b) / b, a);
  }
}

TEST(Scalar, DyadicPathAgreesWithFractions) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 10000; ++t) {
    const Sample x = random_sample(rng, t % 2 == 0);
    const Sample y = random_sample(rng, t % 4 < 2);
    EXPECT_EQ((x.s + y.s).to_mpq(), x.q + y.q);
    EXPECT_EQ((x.s - y.s).to_mpq(), x.q - y.q);
    EXPECT_EQ((x.s * y.s).to_mpq(), x.q * y.q);
    EXPECT_EQ((x.s / y.s).to_mpq(), x.q / y.q);
    EXPECT_EQ(x.s < y.s, x.q < y.q);
    EXPECT_EQ(x.s == y.s, x.q == y.q);
  }
}

TEST(Scalar, HugeExponentsCompareWithoutExpansion) {
  const Scalar tiny = Scalar::pow2(Int("-100000000000000000000"));
  const Scalar small = Scalar::fraction(Int(3), Int(7)) * Scalar::pow2(Int("-99999999999999999999"));
  // 3/7 * 2 < 1 < 9/7
  EXPECT_GT(tiny, small);
  EXPECT_LT(tiny, Scalar::fraction(Int(9), Int(7)) * tiny);
  EXPECT_GT(Scalar(1), small);
  EXPECT_EQ((tiny * Scalar::pow2(Int("100000000000000000000"))).str(), "1");
  EXPECT_THROW(static_cast<void>(tiny + Scalar(1)), isp::MagnitudeError);
}

TEST(Scalar, NearTieComparisonIsExact) {
  const Scalar a = Scalar::fraction(Int(1023), Int(1024));
  const Scalar b = Scalar::fraction(Int(1024), Int(1025));
  EXPECT_LT(a, b);
  EXPECT_LT(-b, -a);
  EXPECT_EQ(abs(-a), a);
}

TEST(Scalar, SerializationRoundTrip) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 1000; ++t) {
    const Scalar s = random_sample(rng, t % 2 == 0).s;
    EXPECT_EQ(Scalar::parse(s.str()), s);
    EXPECT_EQ(Scalar::parse(s.str()).str(), s.str());
  }
  EXPECT_EQ(Scalar::parse("10/4"), Scalar::fraction(Int(5), Int(2)));
  EXPECT_EQ(Scalar::parse("-2^-7"), -Scalar::pow2(-7));
  EXPECT_EQ(Scalar::parse("3/5*2^4"), Scalar::fraction(Int(48), Int(5)));
  EXPECT_THROW(Scalar::parse("abc"), std::invalid_argument);
  EXPECT_THROW(Scalar::parse("1/0"), std::invalid_argument);
  EXPECT_THROW(Scalar::parse("3^2"), std::invalid_argument);
}
