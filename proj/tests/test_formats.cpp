#include <gtest/gtest.h>

#include <random>

#include "isp/formats.hpp"
#include "isp/params.hpp"
#include "strict_fixture.hpp"

namespace {

using isp::Int;
using isp::Rank;
using isp::RankMap;
using isp::Scalar;
using isp::SparseVector;

const isp::OperatorModel& strict() {
  static const isp::OperatorModel m = strict_model();
  return m;
}

RankMap random_map(std::mt19937_64& rng, const Rank& bound) {
  RankMap x;
  for (int t = 0; t < 6; ++t) {
    const Rank k = Rank(static_cast<unsigned long>(rng() % bound.get_ui()));
    isp::accumulate(x, k, Scalar::fraction(static_cast<long>(rng() % 19) - 9, 1 + rng() % 7) * Scalar::pow2(static_cast<long>(rng() % 9) - 4));
  }
  return x;
}

TEST(Formats, VectorRoundTripBothForms) {
  const auto& m = strict();
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const RankMap x = random_map(rng, m.rank_horizon());
    const SparseVector xv = m.to_coord_form(x);
    EXPECT_EQ(isp::parse_vector(isp::vector_text(x), m), xv);
    EXPECT_EQ(isp::parse_vector(isp::vector_text(xv), m), xv);
  }
}

TEST(Formats, GammaAndPolynomialRoundTrip) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    RankMap y = random_map(rng, Rank(1000));
    EXPECT_EQ(isp::parse_gamma(isp::gamma_text(y)), y);
    y.erase(Rank(0));
    EXPECT_EQ(isp::parse_polynomial(isp::polynomial_text(y)), y);
  }
}

TEST(Formats, RejectsWrongMagicAndForm) {
  const auto& m = strict();
  EXPECT_THROW(isp::parse_vector("isp-gamma v1\n0 1\n", m), isp::ParseError);
  EXPECT_THROW(isp::parse_vector("isp-vector v1\nform rows\n0 1\n", m), isp::ParseError);
  EXPECT_THROW(isp::parse_vector("isp-vector v1\nform ranks\n0 x\n", m), isp::ParseError);
  EXPECT_THROW(isp::parse_gamma("isp-vector v1\n0 1\n"), isp::ParseError);
  EXPECT_THROW(isp::parse_polynomial("isp-poly v1\n0 1\n"), isp::ParseError);
  EXPECT_THROW(isp::parse_vector("isp-vector v1\nform ranks\n999999999 1\n", m), isp::HorizonExceeded);
}

TEST(Formats, CertificateForUnitVector) {
  const auto& m = strict();
  const auto rep = isp::cyclic_certificate(SparseVector::unit({Int(0), 0}), 0, m);
  const std::string text = isp::certificate_text(rep, "abc");
  EXPECT_EQ(text.rfind("isp-certificate v1\nparams-sha256 abc\nN 0\n", 0), 0u);
  EXPECT_NE(text.find("\nfinal_norm 1\nbound 4\nverdict PASS\n"), std::string::npos);
  EXPECT_NE(text.find("\npolynomial\n4 1\nend\n"), std::string::npos);
}

TEST(Fixtures, BuiltinParamsMatchCommittedFiles) {
  const std::string dir = ISP_FIXTURE_DIR;
  EXPECT_EQ(isp::to_text(isp::builtin_params(isp::Mode::strict)), isp::read_file(dir + "/strict.params"));
  EXPECT_EQ(isp::to_text(isp::builtin_params(isp::Mode::toy)), isp::read_file(dir + "/toy.params"));
}

TEST(Fixtures, CommittedStrictFileRebuildsTheFixtureModel) {
  const auto pf = isp::load_params(std::string(ISP_FIXTURE_DIR) + "/strict.params");
  const auto m = pf.build_model();
  ASSERT_EQ(m.stage_count(), 2u);
  EXPECT_EQ(m.stage(0).log2_D, Int(4));
  EXPECT_EQ(m.stage(1).log2_D, Int(0));
  EXPECT_EQ(m.stage(1).a, strict().stage(1).a);
  EXPECT_EQ(m.rank_horizon(), strict().rank_horizon());
}

}  // namespace
