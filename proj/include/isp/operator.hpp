#pragma once

// The operator T on finitely supported vectors.
//
// Stage n owns the rank interval [P_n, P_{n+1}) where P_n = pos(Delta_n, 0).
// On its pure part [P_n, A_n), A_n = pos(a_n, 0), T^j e_0 = alpha_j e_j; on its
// echo part [A_n, P_{n+1}), T^j e_0 = eps_n e_j + T^{j - A_n} e_0.  Vectors are
// handled in rank form (rank -> coefficient) internally; the gamma basis
// gamma_j = T^j e_0 turns T into a plain shift.

#include <cstdint>
#include <optional>
#include <vector>

#include "isp/errors.hpp"
#include "isp/ordering.hpp"
#include "isp/weights.hpp"

namespace isp {

enum class Mode { strict, toy };

const char* mode_name(Mode m);
Mode parse_mode(std::string_view s);

/// The level sequence 0,1, 0,1,2, 0,1,2,3, ...
unsigned nn_level(std::uint64_t n);
/// First stage index n with nn_level(n) == N.
std::uint64_t first_stage_with_level(unsigned N);

/// What a caller chooses for one stage; everything else is derived.
struct StageChoice {
  Int a;
  std::optional<Int> b;  // absent for stage 0
  std::optional<Int> s;  // absent for stage 0
};

struct StageParams {
  std::size_t index = 0;
  unsigned level = 0;  // N_n
  Int a, delta, delta_next;
  std::optional<Int> b, s;
  std::optional<Int> log2_D;  // D_n = 2^log2_D once committed
  Scalar eps;                 // 1 / A_{N_n, a_n}
  Rank pos_delta, pos_a, pos_delta_next;
  std::optional<Rank> pos_b, pos_s;

  Scalar D() const;
};

enum class RankCase { zero, pure_interior, pure_last, echo_interior, boundary };
const char* rank_case_name(RankCase c);

class OperatorModel {
 public:
  explicit OperatorModel(Mode mode = Mode::toy, WeightConfig weights = {});

  Mode mode() const { return mode_; }
  const WeightTable& weights() const { return weights_; }
  const StageGeometry& geometry() const { return geometry_; }
  const std::vector<StageParams>& stages() const { return stages_; }
  const StageParams& stage(std::size_t n) const;
  std::size_t stage_count() const { return stages_.size(); }

  /// Appends the next stage; stage n >= 1 needs D_{n-1} committed first.
  void push_stage(const StageChoice& choice);
  void commit_D(std::size_t n, const Int& log2_D);
  /// Row below which the next b must not fall (strict: 2 P_{last+1}; toy: Delta_{last+1} + 1).
  Int next_b_lower_bound() const;

  /// P_{last+1}: the exclusive bound of ranks where T^j e_0 is known.
  Rank rank_horizon() const;
  /// Stage n with P_n <= j < P_{n+1}; j = 0 belongs to stage 0.
  std::size_t stage_of_rank(const Rank& j) const;
  RankCase classify(const Rank& j) const;

  Scalar alpha(const Rank& j) const;
  /// The 1-2 entry rank form of T^j e_0 with the recursion unfolded.
  RankMap power_e0(const Rank& j) const;
  /// T e_j in rank form (five-case table).
  RankMap apply_basis(const Rank& j) const;
  RankMap apply_ranks(const RankMap& x) const;
  /// Coefficients of x in the gamma basis.
  RankMap gamma_from_ranks(const RankMap& x) const;
  RankMap ranks_from_gamma(const RankMap& y) const;

  RankMap to_rank_form(const SparseVector& x) const;
  SparseVector to_coord_form(const RankMap& x) const;

  /// |x|_N-weight A_{N,i} of the row holding rank j.
  Scalar rank_weight(unsigned N, const Rank& j) const;

 private:
  void check_rank(const Rank& j, const char* what) const;

  Mode mode_;
  WeightTable weights_;
  StageGeometry geometry_;
  std::vector<StageParams> stages_;
};

SparseVector t_power_e0(const Rank& j, const OperatorModel& model);
SparseVector apply_T(const SparseVector& x, const OperatorModel& model);
RankMap to_gamma(const SparseVector& x, const OperatorModel& model);
SparseVector from_gamma(const RankMap& y, const OperatorModel& model);
SparseVector apply_T_power(const Rank& k, const SparseVector& x, const OperatorModel& model);
/// sum_i c_i T^i x; index 0 must be absent.
SparseVector apply_polynomial(const RankMap& coeffs, const SparseVector& x, const OperatorModel& model);

/// Product of two sparse series, sum_{i,k} c_i y_k t^{i+k}.
RankMap convolve(const RankMap& c, const RankMap& y);
RankMap shift_ranks(const RankMap& y, const Rank& k);

/// Seminorms of rank-form vectors.
Scalar graded_seminorm(const RankMap& x, unsigned N, const OperatorModel& model);
Scalar product_seminorm(const RankMap& x, unsigned N, const OperatorModel& model);

}  // namespace isp
