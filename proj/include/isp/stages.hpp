#pragma once

// Inductive choice of stage parameters and the head-space maps built on them.
//
// Every weight is a power of two and every D_n is rounded to one, so each
// growth condition reduces to an inequality between integer exponents.

#include <functional>
#include <string>
#include <vector>

#include "isp/operator.hpp"

namespace isp {

enum class CheckStatus { holds, fails, unchecked };
const char* status_name(CheckStatus s);
CheckStatus parse_status(std::string_view s);

struct ConditionCheck {
  std::string id;  // pos_bn, 2bn, cond1, cond2, cond3, cond4, alpha_a_n
  CheckStatus status = CheckStatus::unchecked;
  std::string lhs, rhs;  // exact values compared (lhs <= rhs is the condition)
  std::string range;     // quantifier range covered
  std::string note;
  bool applicable = true;  // false for conditions that do not exist at stage 0

  friend bool operator==(const ConditionCheck&, const ConditionCheck&) = default;
};

struct ConditionReport {
  std::size_t stage = 0;
  std::vector<ConditionCheck> checks;

  bool all_hold() const;
  const ConditionCheck& get(std::string_view id) const;
  friend bool operator==(const ConditionReport&, const ConditionReport&) = default;
};

struct ConditionOptions {
  std::uint64_t window = 4096;  // exact k-window past b_n for the infinite quantifier
  std::uint64_t max_exact_scan = std::uint64_t(1) << 24;
};

/// Evaluates every growth condition of committed stage n.
ConditionReport evaluate_conditions(const OperatorModel& model, std::size_t n, const ConditionOptions& opt = {});

struct SearchBudget {
  std::uint64_t max_scan = std::uint64_t(1) << 26;  // candidates examined per parameter
  ConditionOptions conditions;
};

using Progress = std::function<void(const std::string&)>;

/// Minimal-first strict search for the next stage; pushes it onto the model.
/// D of the new stage is left uncommitted.
ConditionReport extend_stage(OperatorModel& model, const SearchBudget& budget = {}, const Progress& progress = {});

/// Smallest k >= lower such that A_{N+2,k} >= 2^req A_{N+1,k} for every k' >= k.
Int threshold_2bn(const WeightTable& w, unsigned N, const Int& req, const Int& lower, std::uint64_t max_scan);

/// H_n is spanned by the basis ranks below P_{n+1}; A_n splits pure from echo.
struct HeadSpace {
  std::size_t n;
  Rank dimension;  // P_{n+1}
  Rank split;      // A_n
};
HeadSpace head_space(std::size_t n, const OperatorModel& model);

/// The projection keeping gamma-coordinates below A_n (rank form).
RankMap tau(std::size_t n, const RankMap& x, const OperatorModel& model);
SparseVector tau(std::size_t n, const SparseVector& x, const OperatorModel& model);
/// Truncation to ranks below P_{n+1}.
SparseVector pi(std::size_t n, const SparseVector& x, const OperatorModel& model);

/// Least m >= 1 with |||y/m|||_0 <= 1 and |||tau_n(y)/m|||_0 >= 1/2; throws NotQualifying.
Int k_membership(std::size_t n, const RankMap& y, const OperatorModel& model);

/// ceil of a non-negative scalar.
Int ceil_of(const Scalar& s);

}  // namespace isp
