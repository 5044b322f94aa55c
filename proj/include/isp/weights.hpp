#pragma once

// The weight matrix A_{N,j} = 2^{m(N,j)} and the seminorms built from it.
//
// m(N,0) = N and m(N,j+1) = m(N,j) + 1 while m(N,j) - N lags the target
// T_N(j+1) = floor(k log2(j+2)), k = gain * (N+1); otherwise it stays put.
// Once m - N meets the target at a j where the target moves by at most one
// per step, the row follows m = N + T_N(j) forever; rows are memoized up to
// that point and evaluated in closed form beyond it.

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <vector>

#include "isp/errors.hpp"
#include "isp/sparse_vector.hpp"

namespace isp {

struct WeightConfig {
  /// Target slope multiplier: T_N(j) = floor(gain * (N+1) * log2(j+1)).
  unsigned gain = 1;
  /// Longest prefix of a row the memo may scan.
  std::uint64_t memo_cap = 1u << 22;
  /// Replaces T_N(j); rows with an override have no closed form.
  std::function<Int(unsigned N, const Int& j)> target_override;

  Int target(unsigned N, const Int& j) const;
};

class WeightTable {
 public:
  explicit WeightTable(WeightConfig config = {});
  WeightTable(const WeightTable& other);
  WeightTable& operator=(const WeightTable&) = delete;

  const WeightConfig& config() const { return config_; }

  /// m(N,j).
  Int exponent(unsigned N, const Int& j) const;
  /// A_{N,j} = 2^{m(N,j)}.
  Scalar weight(unsigned N, const Int& j) const { return Scalar::pow2(exponent(N, j)); }

  /// First j from which m(N,j) = N + T_N(j) holds for good; empty with an override.
  std::optional<std::uint64_t> catch_up(unsigned N) const;
  /// Smallest j with m(N,j) >= e.
  Int first_index_with_exponent(unsigned N, const Int& e) const;

 private:
  struct Row {
    std::vector<std::int64_t> m;
    std::optional<std::uint64_t> caught;
  };
  const Row& row(unsigned N, const Int& want) const;
  bool target_step_at_most_one(unsigned N, std::uint64_t j) const;

  WeightConfig config_;
  mutable std::mutex mu_;
  mutable std::vector<Row> rows_;
};

/// sum_i |col(i)| A_{N,i}.
Scalar column_seminorm(const ColumnMap& col, unsigned N, const WeightTable& w);
/// Columns 0..N only.
Scalar product_seminorm(const SparseVector& x, unsigned N, const WeightTable& w);
/// All columns.
Scalar graded_seminorm(const SparseVector& x, unsigned N, const WeightTable& w);

/// Smallest j0 <= budget with A_{N,j}/A_{N+1,j} <= eps on [j0, budget].
std::uint64_t ratio_decay_threshold(unsigned N, const Scalar& eps, std::uint64_t budget, const WeightTable& w);

}  // namespace isp
