#include "isp/simplex.hpp"

#include <optional>
#include <stdexcept>

namespace isp {

std::size_t LinearProgram::add_row(std::vector<std::pair<std::size_t, Scalar>> entries, Scalar b) {
  for (const auto& [col, v] : entries) {
    if (col >= columns) throw std::out_of_range("LP column out of range");
  }
  rows.push_back(std::move(entries));
  rhs.push_back(std::move(b));
  return rows.size() - 1;
}

namespace {

class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n) : a_(m, std::vector<Scalar>(n)), b_(m), basis_(m) {}

  std::vector<std::vector<Scalar>>& a() { return a_; }
  std::vector<Scalar>& b() { return b_; }
  std::vector<std::size_t>& basis() { return basis_; }
  std::size_t pivots() const { return pivots_; }

  void pivot(std::size_t r, std::size_t c) {
    ++pivots_;
    const Scalar inv = a_[r][c].reciprocal();
    for (auto& v : a_[r]) {
      if (!v.is_zero()) v *= inv;
    }
    b_[r] *= inv;
    for (std::size_t i = 0; i < a_.size(); ++i) {
      if (i == r || a_[i][c].is_zero()) continue;
      const Scalar f = a_[i][c];
      for (std::size_t k = 0; k < a_[i].size(); ++k) {
        if (!a_[r][k].is_zero()) a_[i][k] -= f * a_[r][k];
      }
      b_[i] -= f * b_[r];
    }
    basis_[r] = c;
  }

  // Minimizes cost over the current basic feasible solution; columns >= limit never enter.
  LpResult::Status optimize(const std::vector<Scalar>& cost, std::size_t limit) {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t c = 0; c < limit && !enter; ++c) {
        if (is_basic(c)) continue;
        Scalar reduced = cost[c];
        for (std::size_t r = 0; r < a_.size(); ++r) {
          if (!a_[r][c].is_zero()) reduced -= cost[basis_[r]] * a_[r][c];
        }
        if (reduced < Scalar(0)) enter = c;
      }
      if (!enter) return LpResult::Status::optimal;
      std::optional<std::size_t> leave;
      Scalar best;
      for (std::size_t r = 0; r < a_.size(); ++r) {
        if (!(a_[r][*enter] > Scalar(0))) continue;
        const Scalar ratio = b_[r] / a_[r][*enter];
        if (!leave || ratio < best || (ratio == best && basis_[r] < basis_[*leave])) {
          leave = r;
          best = ratio;
        }
      }
      if (!leave) return LpResult::Status::unbounded;
      pivot(*leave, *enter);
    }
  }

  bool is_basic(std::size_t c) const {
    for (std::size_t v : basis_) {
      if (v == c) return true;
    }
    return false;
  }

 private:
  std::vector<std::vector<Scalar>> a_;
  std::vector<Scalar> b_;
  std::vector<std::size_t> basis_;
  std::size_t pivots_ = 0;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.columns;
  if (lp.cost.size() != n) throw std::invalid_argument("LP cost vector has the wrong length");
  Tableau t(m, n + m);
  for (std::size_t r = 0; r < m; ++r) {
    const bool flip = lp.rhs[r] < Scalar(0);
    for (const auto& [c, v] : lp.rows[r]) t.a()[r][c] += flip ? -v : v;
    t.b()[r] = flip ? -lp.rhs[r] : lp.rhs[r];
    t.a()[r][n + r] = Scalar(1);
    t.basis()[r] = n + r;
  }

  // Phase 1: drive the artificial variables to zero.
  std::vector<Scalar> phase1(n + m);
  for (std::size_t r = 0; r < m; ++r) phase1[n + r] = Scalar(1);
  t.optimize(phase1, n + m);
  LpResult result;
  Scalar infeasibility;
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis()[r] >= n) infeasibility += t.b()[r];
  }
  if (!infeasibility.is_zero()) {
    result.status = LpResult::Status::infeasible;
    result.pivots = t.pivots();
    return result;
  }
  // Artificials left in the basis sit at zero; swap them out where a real column allows.
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis()[r] < n) continue;
    for (std::size_t c = 0; c < n; ++c) {
      if (!t.a()[r][c].is_zero() && !t.is_basic(c)) {
        t.pivot(r, c);
        break;
      }
    }
  }

  std::vector<Scalar> phase2(n + m);
  for (std::size_t c = 0; c < n; ++c) phase2[c] = lp.cost[c];
  result.status = t.optimize(phase2, n);
  result.pivots = t.pivots();
  if (result.status != LpResult::Status::optimal) return result;
  result.x.assign(n, Scalar(0));
  for (std::size_t r = 0; r < m; ++r) {
    if (t.basis()[r] < n) result.x[t.basis()[r]] = t.b()[r];
  }
  for (std::size_t c = 0; c < n; ++c) result.objective += lp.cost[c] * result.x[c];
  return result;
}

}  // namespace isp
