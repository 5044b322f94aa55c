#pragma once

// Exact verification suites over a committed model.  Each suite groups its
// checks; a group keeps its count, its tightest instance (largest lhs/rhs) and
// every failing instance.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "isp/cyclicity.hpp"

namespace isp {

struct VerifyRanges {
  std::uint64_t jmax = 5000;  // basis ranks / weight indices scanned
  unsigned Nmax = 6;          // seminorm levels for continuity checks
  unsigned weight_Nmax = 10;  // levels for the weight-family items
  std::uint64_t seed = 20240611;
  std::size_t samples = 100;  // random combinations per sampled check
};

struct CheckRecord {
  std::string group, instance, lhs, rhs;
  bool pass = true;
};

struct GroupSummary {
  std::string group;
  std::size_t count = 0, passed = 0;
  std::optional<CheckRecord> tightest;
  std::optional<Scalar> tightest_ratio;
};

struct SuiteReport {
  std::string suite;
  std::string subject;  // what the suite checks, in words
  std::vector<GroupSummary> groups;
  std::vector<CheckRecord> failures;  // capped
  std::map<std::string, std::size_t> census;
  bool growth_dependent = false;  // failures in toy mode are expected
  bool toy = false;
  std::string note;

  /// lhs <= rhs.
  void record_le(const std::string& group, const std::string& instance, const Scalar& lhs, const Scalar& rhs);
  /// Exact equality of two texts (canonical forms).
  void record_eq(const std::string& group, const std::string& instance, const std::string& lhs,
                 const std::string& rhs);
  void record(const std::string& group, const std::string& instance, const std::string& lhs, const std::string& rhs,
              bool pass);

  std::size_t count() const;
  std::size_t passed() const;
  bool ok() const { return passed() == count(); }
  /// "PASS", "FAIL" or "EXPECTED-FAIL".
  std::string verdict() const;

 private:
  GroupSummary& group_of(const std::string& group);
};

/// Suite ids in run order.
const std::vector<std::string>& suite_ids();

/// Throws std::invalid_argument for an unknown id.
SuiteReport run_verification_suite(const std::string& id, const OperatorModel& model, const VerifyRanges& ranges = {});

/// Deterministic text report (params_hash may be empty).
std::string format_reports(const std::vector<SuiteReport>& reports, const VerifyRanges& ranges,
                           const std::string& params_hash);
/// Machine-readable summary with counts per suite.
std::string summary_json(const std::vector<SuiteReport>& reports, const VerifyRanges& ranges,
                         const std::string& params_hash);

}  // namespace isp
