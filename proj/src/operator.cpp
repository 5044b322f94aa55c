#include "isp/operator.hpp"

#include <algorithm>

namespace isp {

const char* mode_name(Mode m) { return m == Mode::strict ? "strict" : "toy"; }

Mode parse_mode(std::string_view s) {
  if (s == "strict") return Mode::strict;
  if (s == "toy") return Mode::toy;
  throw std::invalid_argument("unknown mode '" + std::string(s) + "'");
}

namespace {

// Block k >= 1 holds 0..k and starts at index (k-1)(k+2)/2.
std::uint64_t block_start(std::uint64_t k) { return (k - 1) * (k + 2) / 2; }

}  // namespace

unsigned nn_level(std::uint64_t n) {
  std::uint64_t k = 1;
  while (block_start(k + 1) <= n) ++k;
  return static_cast<unsigned>(n - block_start(k));
}

std::uint64_t first_stage_with_level(unsigned N) { return block_start(std::max<std::uint64_t>(1, N)) + N; }

Scalar StageParams::D() const {
  if (!log2_D) throw std::logic_error("D_" + std::to_string(index) + " is not committed");
  return Scalar::pow2(*log2_D);
}

const char* rank_case_name(RankCase c) {
  switch (c) {
    case RankCase::zero:
      return "zero";
    case RankCase::pure_interior:
      return "pure-interior";
    case RankCase::pure_last:
      return "pure-last";
    case RankCase::echo_interior:
      return "echo-interior";
    case RankCase::boundary:
      return "boundary";
  }
  return "?";
}

OperatorModel::OperatorModel(Mode mode, WeightConfig weights) : mode_(mode), weights_(std::move(weights)) {}

const StageParams& OperatorModel::stage(std::size_t n) const {
  if (n >= stages_.size()) throw HorizonExceeded("stage " + std::to_string(n) + " is not constructed");
  return stages_[n];
}

Int OperatorModel::next_b_lower_bound() const {
  if (stages_.empty()) return 1;
  const StageParams& last = stages_.back();
  return mode_ == Mode::strict ? Int(2 * last.pos_delta_next) : Int(last.delta_next + 1);
}

void OperatorModel::push_stage(const StageChoice& choice) {
  const std::size_t n = stages_.size();
  const std::string tag = "stage " + std::to_string(n) + ": ";
  StageParams st;
  st.index = n;
  st.level = nn_level(n);
  st.a = choice.a;
  if (n == 0) {
    if (choice.b || choice.s) throw std::invalid_argument(tag + "stage 0 has no b or s");
    st.delta = 1;
    if (!(st.delta < st.a)) throw std::invalid_argument(tag + "needs a_0 > 1");
  } else {
    const StageParams& prev = stages_.back();
    if (!prev.log2_D) throw std::logic_error(tag + "D_" + std::to_string(n - 1) + " must be committed first");
    if (!choice.b || !choice.s) throw std::invalid_argument(tag + "b and s are required");
    st.delta = prev.delta_next;
    st.b = choice.b;
    st.s = choice.s;
    if (!(st.delta < *st.b && 2 * *st.b < *st.s && *st.s < st.a)) {
      throw std::invalid_argument(tag + "needs Delta < b < 2b < s < a, got Delta=" + st.delta.get_str() +
                                  " b=" + st.b->get_str() + " s=" + st.s->get_str() + " a=" + st.a.get_str());
    }
    geometry_.append(*st.b);
  }
  // Rows up to Delta_{n+1} are fixed by b_1..b_n, whatever b_{n+1} turns out to be.
  geometry_.set_next_lower_bound(std::nullopt);
  st.pos_delta = geometry_.pos_column0(st.delta);
  st.pos_a = geometry_.pos_column0(st.a);
  if (st.b) st.pos_b = geometry_.pos_column0(*st.b);
  if (st.s) st.pos_s = geometry_.pos_column0(*st.s);
  st.delta_next = st.a + st.pos_delta;
  st.pos_delta_next = geometry_.pos_column0(st.delta_next);
  st.eps = Scalar::pow2(-weights_.exponent(st.level, st.a));
  stages_.push_back(std::move(st));
  geometry_.set_next_lower_bound(next_b_lower_bound());
}

void OperatorModel::commit_D(std::size_t n, const Int& log2_D) {
  if (n >= stages_.size()) throw std::out_of_range("no stage " + std::to_string(n));
  if (log2_D < 0) throw std::invalid_argument("D must be >= 1");
  if (n + 1 < stages_.size() && stages_[n].log2_D != log2_D) {
    throw std::logic_error("D_" + std::to_string(n) + " is already used by stage " + std::to_string(n + 1));
  }
  stages_[n].log2_D = log2_D;
}

Rank OperatorModel::rank_horizon() const { return stages_.empty() ? Rank(1) : stages_.back().pos_delta_next; }

void OperatorModel::check_rank(const Rank& j, const char* what) const {
  if (j < 0) throw std::invalid_argument(std::string(what) + ": negative rank");
  if (j >= rank_horizon()) {
    throw HorizonExceeded(std::string(what) + ": rank " + j.get_str() + " needs stage " +
                              std::to_string(stages_.size()),
                          Rank(rank_horizon() - 1));
  }
}

std::size_t OperatorModel::stage_of_rank(const Rank& j) const {
  check_rank(j, "stage lookup");
  if (stages_.empty()) return 0;
  const auto it = std::upper_bound(stages_.begin(), stages_.end(), j,
                                   [](const Rank& r, const StageParams& s) { return r < s.pos_delta; });
  return it == stages_.begin() ? 0 : static_cast<std::size_t>(it - stages_.begin()) - 1;
}

RankCase OperatorModel::classify(const Rank& j) const {
  if (j == 0) return RankCase::zero;
  const StageParams& st = stages_[stage_of_rank(j)];
  if (j < st.pos_a - 1) return RankCase::pure_interior;
  if (j == st.pos_a - 1) return RankCase::pure_last;
  if (j < st.pos_delta_next - 1) return RankCase::echo_interior;
  return RankCase::boundary;
}

Scalar OperatorModel::alpha(const Rank& j) const {
  const std::size_t n = stage_of_rank(j);
  const StageParams& st = stages_.at(n);
  if (j == 0 || j >= st.pos_a) {
    throw RankOutsideAlphaDomain("alpha_" + j.get_str() + " is not defined: rank is not a pure shift rank");
  }
  if (n == 0) return st.eps * Scalar::pow2(Int(j - 1));
  const Int step = 1 + *stages_[n - 1].log2_D;
  if (j < *st.pos_s) return st.eps * Scalar::pow2(Int(-step * (j - st.pos_delta)));
  return st.eps * Scalar::pow2(Int(-step * (*st.pos_s - 1 - st.pos_delta) + (j - *st.pos_s)));
}

RankMap OperatorModel::power_e0(const Rank& j) const {
  RankMap out;
  Rank r = j;
  for (;;) {
    if (r == 0) {
      accumulate(out, r, Scalar(1));
      return out;
    }
    const StageParams& st = stages_[stage_of_rank(r)];
    if (r < st.pos_a) {
      accumulate(out, r, alpha(r));
      return out;
    }
    accumulate(out, r, st.eps);
    r -= st.pos_a;
  }
}

RankMap OperatorModel::apply_basis(const Rank& j) const {
  check_rank(j, "T e_j");
  if (stages_.empty()) throw HorizonExceeded("T e_0 needs stage 0", Rank(0));
  RankMap out;
  switch (classify(j)) {
    case RankCase::zero:
      out.emplace(Rank(1), alpha(Rank(1)));
      break;
    case RankCase::pure_interior:
      out.emplace(Rank(j + 1), alpha(Rank(j + 1)) / alpha(j));
      break;
    case RankCase::pure_last: {
      const StageParams& st = stages_[stage_of_rank(j)];
      const Scalar inv = alpha(j).reciprocal();
      out.emplace(Rank(0), inv);
      out.emplace(st.pos_a, st.eps * inv);
      break;
    }
    case RankCase::echo_interior:
      out.emplace(Rank(j + 1), Scalar(1));
      break;
    case RankCase::boundary: {
      const std::size_t n = stage_of_rank(j);
      if (n + 1 >= stages_.size()) {
        throw HorizonExceeded("T e_" + j.get_str() + " is a stage boundary and needs stage " + std::to_string(n + 1),
                              Rank(j - 1));
      }
      const StageParams& st = stages_[n];
      const Scalar inv = st.eps.reciprocal();
      accumulate(out, st.pos_delta_next, inv * alpha(st.pos_delta_next));
      accumulate(out, st.pos_delta, -(inv * alpha(st.pos_delta)));
      break;
    }
  }
  return out;
}

RankMap OperatorModel::apply_ranks(const RankMap& x) const {
  RankMap out;
  for (const auto& [j, v] : x) {
    for (const auto& [k, w] : apply_basis(j)) accumulate(out, k, v * w);
  }
  return out;
}

RankMap OperatorModel::gamma_from_ranks(const RankMap& x) const {
  RankMap y;
  for (const auto& [j, v] : x) {
    if (j == 0) {
      check_rank(j, "gamma coordinates");
      accumulate(y, j, v);
      continue;
    }
    const StageParams& st = stages_[stage_of_rank(j)];
    if (j < st.pos_a) {
      accumulate(y, j, v / alpha(j));
    } else {
      // e_j = (gamma_j - gamma_{j - A_n}) / eps_n
      const Scalar c = v / st.eps;
      accumulate(y, j, c);
      accumulate(y, Rank(j - st.pos_a), -c);
    }
  }
  return y;
}

RankMap OperatorModel::ranks_from_gamma(const RankMap& y) const {
  RankMap x;
  for (const auto& [k, v] : y) {
    for (const auto& [j, w] : power_e0(k)) accumulate(x, j, v * w);
  }
  return x;
}

RankMap OperatorModel::to_rank_form(const SparseVector& x) const {
  RankMap out;
  for (const auto& [c, v] : x.entries()) out.emplace(geometry_.coord_to_rank(c), v);
  return out;
}

SparseVector OperatorModel::to_coord_form(const RankMap& x) const {
  SparseVector out;
  for (const auto& [j, v] : x) out.add(geometry_.rank_to_coord(j), v);
  return out;
}

Scalar OperatorModel::rank_weight(unsigned N, const Rank& j) const {
  return weights_.weight(N, geometry_.rank_to_coord(j).i);
}

SparseVector t_power_e0(const Rank& j, const OperatorModel& model) {
  return model.to_coord_form(model.power_e0(j));
}

SparseVector apply_T(const SparseVector& x, const OperatorModel& model) {
  return model.to_coord_form(model.apply_ranks(model.to_rank_form(x)));
}

RankMap to_gamma(const SparseVector& x, const OperatorModel& model) {
  return model.gamma_from_ranks(model.to_rank_form(x));
}

SparseVector from_gamma(const RankMap& y, const OperatorModel& model) {
  return model.to_coord_form(model.ranks_from_gamma(y));
}

RankMap shift_ranks(const RankMap& y, const Rank& k) {
  RankMap out;
  for (const auto& [j, v] : y) out.emplace_hint(out.end(), j + k, v);
  return out;
}

SparseVector apply_T_power(const Rank& k, const SparseVector& x, const OperatorModel& model) {
  if (k < 0) throw std::invalid_argument("negative power");
  return from_gamma(shift_ranks(to_gamma(x, model), k), model);
}

RankMap convolve(const RankMap& c, const RankMap& y) {
  RankMap out;
  for (const auto& [i, ci] : c) {
    for (const auto& [k, yk] : y) accumulate(out, Rank(i + k), ci * yk);
  }
  return out;
}

SparseVector apply_polynomial(const RankMap& coeffs, const SparseVector& x, const OperatorModel& model) {
  if (coeffs.count(Rank(0))) throw ConstantTermPresent("polynomial has a constant term");
  for (const auto& [i, c] : coeffs) {
    if (i < 0) throw std::invalid_argument("negative polynomial degree");
  }
  return from_gamma(convolve(coeffs, to_gamma(x, model)), model);
}

Scalar graded_seminorm(const RankMap& x, unsigned N, const OperatorModel& model) {
  Scalar total;
  for (const auto& [j, v] : x) total += abs(v) * model.rank_weight(N, j);
  return total;
}

Scalar product_seminorm(const RankMap& x, unsigned N, const OperatorModel& model) {
  Scalar total;
  for (const auto& [j, v] : x) {
    const Coord c = model.geometry().rank_to_coord(j);
    if (c.j <= N) total += abs(v) * model.weights().weight(N, c.i);
  }
  return total;
}

}  // namespace isp
