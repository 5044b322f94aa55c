#include <random>

#include <gtest/gtest.h>

#include "isp/operator.hpp"
#include "toy_fixture.hpp"

using namespace isp;

namespace {

using QMap = std::map<long, mpq_class>;

// Independent rational model of the toy operator: ranks from iterating Next,
// weights from a direct chase, alphas from the stage formulas.
struct Oracle {
  std::vector<long> P, A, S;  // P has one extra entry
  std::vector<mpq_class> eps;

  Oracle() {
    BParams b;
    b.values = {Int(6), Int(30), Int(120)};
    const auto path = path_prefix(2100, b);
    auto pos = [&](long row) {
      for (std::size_t k = 0; k < path.size(); ++k) {
        if (path[k] == Coord(row, 0)) return static_cast<long>(k);
      }
      throw std::runtime_error("row not reached");
    };
    const long a[] = {4, 16, 64, 250};
    const long s[] = {0, 14, 62, 242};
    const unsigned level[] = {0, 1, 0, 1};
    long delta = 1;
    P.push_back(pos(delta));
    for (int n = 0; n < 4; ++n) {
      A.push_back(pos(a[n]));
      S.push_back(n ? pos(s[n]) : 0);
      delta = a[n] + P.back();
      P.push_back(pos(delta));
      eps.emplace_back(mpq_class(1, 1) / power2(chase(level[n], a[n])));
    }
  }

  static long chase(unsigned N, long j) {
    long m = static_cast<long>(N);
    for (long k = 1; k <= j; ++k) {
      Int p = 1;
      for (unsigned t = 0; t <= N; ++t) p *= Int(k + 1);
      const long target = static_cast<long>(mpz_sizeinbase(p.get_mpz_t(), 2)) - 1;
      if (m - static_cast<long>(N) < target) ++m;
    }
    return m;
  }

  static mpq_class power2(long e) {
    mpq_class r(1);
    for (long k = 0; k < std::abs(e); ++k) r *= 2;
    return e >= 0 ? r : mpq_class(1) / r;
  }

  int stage(long j) const {
    int n = 0;
    while (n + 1 < 4 && P[n + 1] <= j) ++n;
    return n;
  }

  mpq_class alpha(long j) const {
    const int n = stage(j);
    if (n == 0) return eps[0] * power2(j - 1);
    if (j < S[n]) return eps[n] * power2(-2 * (j - P[n]));
    return alpha(S[n] - 1) * power2(j - S[n]);
  }

  QMap power_e0(long j) const {
    if (j == 0) return {{0, mpq_class(1)}};
    const int n = stage(j);
    if (j < A[n]) return {{j, alpha(j)}};
    QMap r = power_e0(j - A[n]);
    r[j] += eps[n];
    return r;
  }
};

const Oracle& oracle() {
  static const Oracle o;
  return o;
}

QMap as_q(const RankMap& m) {
  QMap q;
  for (const auto& [k, v] : m) q[k.get_si()] = v.to_mpq();
  return q;
}

RankMap random_ranks(std::mt19937_64& rng, long below, int terms) {
  RankMap x;
  for (int t = 0; t < terms; ++t) {
    const long num = static_cast<long>(rng() % 19) - 9;
    const long den = static_cast<long>(rng() % 5) + 1;
    accumulate(x, Rank(static_cast<long>(rng() % below)), Scalar::fraction(num, den));
  }
  return x;
}

}  // namespace

TEST(Levels, Sequence) {
  const unsigned expected[] = {0, 1, 0, 1, 2, 0, 1, 2, 3, 0, 1, 2, 3, 4};
  for (std::uint64_t n = 0; n < 14; ++n) EXPECT_EQ(nn_level(n), expected[n]) << n;
  for (std::uint64_t n = 0; n < 2000; ++n) EXPECT_LE(nn_level(n), n);
  EXPECT_EQ(first_stage_with_level(0), 0u);
  EXPECT_EQ(first_stage_with_level(1), 1u);
  EXPECT_EQ(first_stage_with_level(3), 8u);
  for (unsigned N = 0; N < 20; ++N) {
    const auto n = first_stage_with_level(N);
    EXPECT_EQ(nn_level(n), N);
    for (std::uint64_t k = 0; k < n; ++k) EXPECT_NE(nn_level(k), N);
  }
}

TEST(ToyModel, StageRanks) {
  const OperatorModel m = toy_model();
  const long P[] = {1, 5, 47, 355, 2051};
  const long delta[] = {1, 5, 21, 111, 605};
  for (std::size_t n = 0; n < 4; ++n) {
    const StageParams& st = m.stage(n);
    EXPECT_EQ(st.delta, delta[n]);
    EXPECT_EQ(st.delta_next, delta[n + 1]);
    EXPECT_EQ(st.pos_delta, P[n]);
    EXPECT_EQ(st.pos_delta_next, P[n + 1]);
    EXPECT_EQ(st.pos_delta_next, st.pos_a + st.pos_delta);
    EXPECT_EQ(st.pos_delta, oracle().P[n]);
    EXPECT_EQ(st.pos_a, oracle().A[n]);
    EXPECT_EQ(st.eps.to_mpq(), oracle().eps[n]);
  }
  EXPECT_EQ(m.rank_horizon(), 2051);
  EXPECT_EQ(m.stage(0).eps, Scalar::fraction(1, 4));
}

TEST(ToyModel, RejectsBrokenInterleaving) {
  OperatorModel m(Mode::toy);
  EXPECT_THROW(m.push_stage({Int(1), std::nullopt, std::nullopt}), std::invalid_argument);
  m.push_stage({Int(4), std::nullopt, std::nullopt});
  EXPECT_THROW(m.push_stage({Int(16), Int(6), Int(14)}), std::logic_error);  // D_0 missing
  m.commit_D(0, Int(1));
  EXPECT_THROW(m.push_stage({Int(16), Int(6), Int(12)}), std::invalid_argument);  // s = 2b
  EXPECT_THROW(m.push_stage({Int(16), Int(5), Int(14)}), std::invalid_argument);  // b = Delta
}

TEST(Alpha, ClosedFormsAndOracle) {
  const OperatorModel m = toy_model();
  for (std::size_t n = 0; n < 4; ++n) EXPECT_EQ(m.alpha(m.stage(n).pos_delta), m.stage(n).eps);
  for (long j = 1; j < 4; ++j) EXPECT_EQ(m.alpha(Rank(j)), Scalar::pow2(j - 1) * m.stage(0).eps);
  for (long j = 1; j < 2051; ++j) {
    const int n = oracle().stage(j);
    if (j >= oracle().A[n]) {
      EXPECT_THROW(m.alpha(Rank(j)), RankOutsideAlphaDomain);
      continue;
    }
    ASSERT_EQ(m.alpha(Rank(j)).to_mpq(), oracle().alpha(j)) << j;
    const Scalar ratio = m.alpha(Rank(j + 1 < oracle().A[n] ? j + 1 : j)) / m.alpha(Rank(j));
    EXPECT_TRUE(ratio == Scalar(1) || ratio == Scalar(2) || ratio == Scalar::fraction(1, 4)) << j;
  }
  EXPECT_THROW(m.alpha(Rank(0)), RankOutsideAlphaDomain);
  EXPECT_THROW(m.alpha(Rank(2051)), HorizonExceeded);
}

TEST(PowerE0, MatchesOracleAndIteration) {
  const OperatorModel m = toy_model();
  RankMap iterate{{Rank(0), Scalar(1)}};
  for (long j = 0; j < 2051; ++j) {
    const RankMap closed = m.power_e0(Rank(j));
    ASSERT_EQ(as_q(closed), oracle().power_e0(j)) << j;
    ASSERT_EQ(iterate, closed) << j;
    ASSERT_LE(closed.size(), 5u);
    if (j + 1 < 2051) iterate = m.apply_ranks(iterate);
  }
  EXPECT_EQ(t_power_e0(Rank(0), m), SparseVector::unit(Coord(0, 0)));
  const Rank A0 = m.stage(0).pos_a;
  EXPECT_EQ(m.power_e0(A0), (RankMap{{Rank(0), Scalar(1)}, {A0, m.stage(0).eps}}));
}

TEST(ApplyT, FiveCaseTable) {
  const OperatorModel m = toy_model();
  std::map<RankCase, int> census;
  for (long j = 0; j < 2050; ++j) {
    const Rank r(j);
    const RankCase c = m.classify(r);
    ++census[c];
    const RankMap image = m.apply_basis(r);
    // Oracle: e_j in gamma coordinates, shifted, expanded back.
    const RankMap expected = m.ranks_from_gamma(shift_ranks(m.gamma_from_ranks({{r, Scalar(1)}}), Rank(1)));
    ASSERT_EQ(image, expected) << j << " " << rank_case_name(c);
    ASSERT_TRUE(image.count(Rank(j + 1)) || c == RankCase::pure_last || c == RankCase::boundary) << j;
    ASSERT_LE(image.rbegin()->first, Rank(j + 1)) << j;
    if (c == RankCase::pure_last) {
      const std::size_t n = m.stage_of_rank(r);
      ASSERT_EQ(image.rbegin()->first, m.stage(n).pos_a);
      ASSERT_EQ(r + 1, m.stage(n).pos_a);
    }
  }
  EXPECT_EQ(census.size(), 5u);
  EXPECT_EQ(census[RankCase::zero], 1);
  EXPECT_EQ(census[RankCase::pure_last], 4);
  EXPECT_EQ(census[RankCase::boundary], 3);
  EXPECT_THROW(m.apply_basis(Rank(2050)), HorizonExceeded);
  const Scalar alpha1 = m.alpha(Rank(1));
  EXPECT_EQ(apply_T(SparseVector::unit(Coord(0, 0)), m), SparseVector::unit(Coord(1, 0), alpha1));
}

TEST(Gamma, Examples) {
  const OperatorModel m = toy_model();
  EXPECT_EQ(to_gamma(SparseVector::unit(Coord(0, 0)), m), (RankMap{{Rank(0), Scalar(1)}}));
  EXPECT_EQ(m.gamma_from_ranks({{Rank(3), Scalar(1)}}), (RankMap{{Rank(3), m.alpha(Rank(3)).reciprocal()}}));
  // Echo rank j = A_1 + 2: e_j = (gamma_j - gamma_{j - A_1}) / eps_1, no further unfolding.
  const StageParams& st = m.stage(1);
  const Rank j = st.pos_a + 2;
  const Scalar inv = st.eps.reciprocal();
  EXPECT_EQ(m.gamma_from_ranks({{j, Scalar(1)}}), (RankMap{{Rank(2), -inv}, {j, inv}}));
  EXPECT_EQ(from_gamma({{st.pos_a, Scalar(1)}}, m),
            SparseVector::unit(Coord(0, 0)) + SparseVector::unit(m.geometry().rank_to_coord(st.pos_a), st.eps));
}

TEST(Gamma, RoundTrip) {
  const OperatorModel m = toy_model();
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 200; ++t) {
    const RankMap x = random_ranks(rng, 2051, 1 + static_cast<int>(rng() % 6));
    const SparseVector v = m.to_coord_form(x);
    EXPECT_EQ(from_gamma(to_gamma(v, m), m), v);
    EXPECT_EQ(m.gamma_from_ranks(m.ranks_from_gamma(x)), x);
  }
}

TEST(Powers, MatchRepeatedApplication) {
  const OperatorModel m = toy_model();
  std::mt19937_64 rng(99);
  for (int t = 0; t < 100; ++t) {
    const SparseVector x = m.to_coord_form(random_ranks(rng, 1990, 1 + static_cast<int>(rng() % 4)));
    const long k = static_cast<long>(rng() % 51);
    SparseVector iterated = x;
    for (long i = 0; i < k; ++i) iterated = apply_T(iterated, m);
    EXPECT_EQ(apply_T_power(Rank(k), x, m), iterated) << t;
  }
  const SparseVector e0 = SparseVector::unit(Coord(0, 0));
  EXPECT_EQ(apply_T_power(Rank(0), e0, m), e0);
  EXPECT_EQ(apply_T_power(Rank(777), e0, m), t_power_e0(Rank(777), m));
  EXPECT_THROW(apply_T_power(Rank(2051), e0, m), HorizonExceeded);
}

TEST(Polynomials, Examples) {
  const OperatorModel m = toy_model();
  const SparseVector e0 = SparseVector::unit(Coord(0, 0));
  EXPECT_EQ(apply_polynomial({{Rank(1), Scalar(1)}}, e0, m), apply_T(e0, m));
  const Rank c = m.stage(2).pos_a;
  const SparseVector r = apply_polynomial({{c, Scalar(1)}}, e0, m);
  EXPECT_EQ(r, e0 + SparseVector::unit(m.geometry().rank_to_coord(c), m.stage(2).eps));
  EXPECT_EQ(graded_seminorm(r - e0, m.stage(2).level, m.weights()), Scalar(1));
  EXPECT_THROW(apply_polynomial({{Rank(0), Scalar(1)}}, e0, m), ConstantTermPresent);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    const RankMap coeffs = random_ranks(rng, 40, 3);
    RankMap p;
    for (const auto& [i, v] : coeffs) accumulate(p, Rank(i + 1), v);
    const SparseVector x = m.to_coord_form(random_ranks(rng, 300, 3));
    SparseVector expected;
    for (const auto& [i, v] : p) expected = expected + v * apply_T_power(i, x, m);
    EXPECT_EQ(apply_polynomial(p, x, m), expected);
  }
}

TEST(Horizon, ExplicitErrors) {
  const OperatorModel m = toy_model(2);
  EXPECT_EQ(m.rank_horizon(), 47);
  EXPECT_THROW(m.power_e0(Rank(47)), HorizonExceeded);
  EXPECT_THROW(m.apply_basis(Rank(46)), HorizonExceeded);
  EXPECT_NO_THROW(m.apply_basis(Rank(4)));
  try {
    m.power_e0(Rank(60));
    FAIL();
  } catch (const HorizonExceeded& e) {
    ASSERT_TRUE(e.largest_valid_rank().has_value());
    EXPECT_EQ(*e.largest_valid_rank(), 46);
  }
}
