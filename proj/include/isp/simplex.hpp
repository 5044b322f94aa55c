#pragma once

// Exact two-phase simplex with Bland's rule:
//   minimize cost . x  subject to  rows x = rhs,  x >= 0.

#include <vector>

#include "isp/scalar.hpp"

namespace isp {

struct LinearProgram {
  std::size_t columns = 0;
  std::vector<std::vector<std::pair<std::size_t, Scalar>>> rows;  // sparse rows
  std::vector<Scalar> rhs;
  std::vector<Scalar> cost;

  /// Appends a constraint row; returns its index.
  std::size_t add_row(std::vector<std::pair<std::size_t, Scalar>> entries, Scalar b);
};

struct LpResult {
  enum class Status { optimal, infeasible, unbounded } status = Status::infeasible;
  std::vector<Scalar> x;
  Scalar objective;
  std::size_t pivots = 0;
};

LpResult solve_lp(const LinearProgram& lp);

}  // namespace isp
