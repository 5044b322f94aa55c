#include <gtest/gtest.h>

#include "isp/verify.hpp"
#include "strict_fixture.hpp"
#include "toy_fixture.hpp"

namespace {

std::vector<isp::SuiteReport> run_all(const isp::OperatorModel& m, const isp::VerifyRanges& r) {
  std::vector<isp::SuiteReport> out;
  for (const auto& id : isp::suite_ids()) out.push_back(isp::run_verification_suite(id, m, r));
  return out;
}

TEST(Verify, StrictModelPassesEverySuite) {
  const auto m = strict_model();
  for (const auto& rep : run_all(m, {})) {
    EXPECT_EQ(rep.verdict(), "PASS") << rep.suite;
    EXPECT_GT(rep.count(), 0u) << rep.suite;
    EXPECT_TRUE(rep.failures.empty()) << rep.suite;
  }
}

TEST(Verify, ToyModelSplitsEquationalFromGrowthSuites) {
  const auto m = toy_model();
  isp::VerifyRanges r;
  r.jmax = 1500;
  for (const auto& rep : run_all(m, r)) {
    if (rep.growth_dependent) {
      EXPECT_NE(rep.verdict(), "FAIL") << rep.suite;
    } else {
      EXPECT_EQ(rep.verdict(), "PASS") << rep.suite;
    }
  }
  const auto cont = isp::run_verification_suite("prop8.2", m, r);
  EXPECT_EQ(cont.verdict(), "EXPECTED-FAIL");
  ASSERT_FALSE(cont.failures.empty());
}

TEST(Verify, OperatorCensusCoversFiveCases) {
  const auto rep = isp::run_verification_suite("prop7.1", toy_model());
  EXPECT_EQ(rep.census.size(), 5u);
  EXPECT_EQ(rep.verdict(), "PASS");
}

TEST(Verify, ReportsAreDeterministic) {
  const auto m = toy_model();
  isp::VerifyRanges r;
  r.jmax = 400;
  r.weight_Nmax = 3;
  const auto a = run_all(m, r);
  const auto b = run_all(m, r);
  EXPECT_EQ(isp::format_reports(a, r, "abc"), isp::format_reports(b, r, "abc"));
  EXPECT_EQ(isp::summary_json(a, r, "abc"), isp::summary_json(b, r, "abc"));
}

TEST(Verify, UnknownSuite) {
  EXPECT_THROW(isp::run_verification_suite("nope", toy_model()), std::invalid_argument);
}

TEST(Verify, RecordKeepsTightestAndFailures) {
  isp::SuiteReport rep;
  rep.record_le("g", "a", isp::Scalar(1), isp::Scalar(4));
  rep.record_le("g", "b", isp::Scalar(3), isp::Scalar(4));
  rep.record_le("g", "c", isp::Scalar(2), isp::Scalar(4));
  ASSERT_EQ(rep.groups.size(), 1u);
  EXPECT_EQ(rep.groups[0].tightest->instance, "b");
  EXPECT_TRUE(rep.ok());
  rep.record_le("g", "d", isp::Scalar(5), isp::Scalar(4));
  EXPECT_FALSE(rep.ok());
  EXPECT_EQ(rep.groups[0].tightest->instance, "d");
  ASSERT_EQ(rep.failures.size(), 1u);
  EXPECT_EQ(rep.verdict(), "FAIL");
}

}  // namespace
