#include <gtest/gtest.h>

#include <functional>
#include <optional>
#include <random>

#include "isp/simplex.hpp"

namespace {

using isp::LinearProgram;
using isp::LpResult;
using isp::Scalar;

// Solves the square system B x = b over mpq; nullopt when singular.
std::optional<std::vector<mpq_class>> solve_square(std::vector<std::vector<mpq_class>> a, std::vector<mpq_class> b) {
  const std::size_t n = a.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && a[p][c] == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(a[p], a[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || a[r][c] == 0) continue;
      const mpq_class f = a[r][c] / a[c][c];
      for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 0; c < n; ++c) b[c] /= a[c][c];
  return b;
}

// Minimum over all basic feasible solutions (bounded feasible LPs only).
std::optional<mpq_class> vertex_oracle(const LinearProgram& lp) {
  const std::size_t m = lp.rows.size();
  const std::size_t n = lp.columns;
  std::vector<std::vector<mpq_class>> dense(m, std::vector<mpq_class>(n));
  for (std::size_t r = 0; r < m; ++r) {
    for (const auto& [c, v] : lp.rows[r]) dense[r][c] += v.to_mpq();
  }
  std::optional<mpq_class> best;
  std::vector<std::size_t> pick(m);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t depth, std::size_t from) {
    if (depth == m) {
      std::vector<std::vector<mpq_class>> a(m, std::vector<mpq_class>(m));
      std::vector<mpq_class> b(m);
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t k = 0; k < m; ++k) a[r][k] = dense[r][pick[k]];
        b[r] = lp.rhs[r].to_mpq();
      }
      auto x = solve_square(a, b);
      if (!x) return;
      mpq_class cost = 0;
      for (std::size_t k = 0; k < m; ++k) {
        if ((*x)[k] < 0) return;
        cost += lp.cost[pick[k]].to_mpq() * (*x)[k];
      }
      if (!best || cost < *best) best = cost;
      return;
    }
    for (std::size_t c = from; c < n; ++c) {
      pick[depth] = c;
      rec(depth + 1, c + 1);
    }
  };
  rec(0, 0);
  return best;
}

void expect_feasible(const LinearProgram& lp, const LpResult& res) {
  ASSERT_EQ(res.x.size(), lp.columns);
  for (const Scalar& v : res.x) EXPECT_GE(v, Scalar(0));
  for (std::size_t r = 0; r < lp.rows.size(); ++r) {
    Scalar lhs;
    for (const auto& [c, v] : lp.rows[r]) lhs += v * res.x[c];
    EXPECT_EQ(lhs, lp.rhs[r]) << "row " << r;
  }
}

TEST(Simplex, TextbookInstance) {
  // min -x - y  s.t.  x + 2y + s1 = 4,  3x + y + s2 = 6
  LinearProgram lp;
  lp.columns = 4;
  lp.cost = {Scalar(-1), Scalar(-1), Scalar(0), Scalar(0)};
  lp.add_row({{0, Scalar(1)}, {1, Scalar(2)}, {2, Scalar(1)}}, Scalar(4));
  lp.add_row({{0, Scalar(3)}, {1, Scalar(1)}, {3, Scalar(1)}}, Scalar(6));
  const LpResult res = isp::solve_lp(lp);
  ASSERT_EQ(res.status, LpResult::Status::optimal);
  EXPECT_EQ(res.objective, Scalar::fraction(-14, 5));
  EXPECT_EQ(res.x[0], Scalar::fraction(8, 5));
  EXPECT_EQ(res.x[1], Scalar::fraction(6, 5));
  expect_feasible(lp, res);
}

TEST(Simplex, DetectsInfeasible) {
  LinearProgram lp;
  lp.columns = 2;
  lp.cost = {Scalar(1), Scalar(1)};
  lp.add_row({{0, Scalar(1)}, {1, Scalar(1)}}, Scalar(-1));
  EXPECT_EQ(isp::solve_lp(lp).status, LpResult::Status::infeasible);
}

TEST(Simplex, DetectsUnbounded) {
  LinearProgram lp;
  lp.columns = 2;
  lp.cost = {Scalar(-1), Scalar(0)};
  lp.add_row({{0, Scalar(1)}, {1, Scalar(-1)}}, Scalar(1));
  EXPECT_EQ(isp::solve_lp(lp).status, LpResult::Status::unbounded);
}

TEST(Simplex, RedundantRows) {
  LinearProgram lp;
  lp.columns = 3;
  lp.cost = {Scalar(2), Scalar(1), Scalar(3)};
  lp.add_row({{0, Scalar(1)}, {1, Scalar(1)}, {2, Scalar(1)}}, Scalar(5));
  lp.add_row({{0, Scalar(2)}, {1, Scalar(2)}, {2, Scalar(2)}}, Scalar(10));
  lp.add_row({{0, Scalar(1)}, {2, Scalar(-1)}}, Scalar(1));
  const LpResult res = isp::solve_lp(lp);
  ASSERT_EQ(res.status, LpResult::Status::optimal);
  expect_feasible(lp, res);
  // x = 1 + z, y = 4 - 2z gives cost 6 + 3z.
  EXPECT_EQ(res.objective, Scalar(6));
}

TEST(Simplex, MatchesVertexOracleOnRandomBoundedPrograms) {
  std::mt19937_64 rng(11);
  int solved = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 3 + rng() % 4;
    const std::size_t m = 1 + rng() % 3;
    LinearProgram lp;
    lp.columns = n + 1;  // last column is the slack of the bounding row
    for (std::size_t c = 0; c < n; ++c) lp.cost.push_back(Scalar(static_cast<long>(rng() % 11) - 5));
    lp.cost.push_back(Scalar(0));
    for (std::size_t r = 0; r < m; ++r) {
      std::vector<std::pair<std::size_t, Scalar>> row;
      for (std::size_t c = 0; c < n; ++c) {
        const long v = static_cast<long>(rng() % 9) - 4;
        if (v != 0) row.emplace_back(c, Scalar::fraction(v, 1 + static_cast<long>(rng() % 3)));
      }
      lp.add_row(std::move(row), Scalar(static_cast<long>(rng() % 7) - 2));
    }
    std::vector<std::pair<std::size_t, Scalar>> bound;
    for (std::size_t c = 0; c <= n; ++c) bound.emplace_back(c, Scalar(1));
    lp.add_row(std::move(bound), Scalar(10));

    const LpResult res = isp::solve_lp(lp);
    const auto oracle = vertex_oracle(lp);
    if (!oracle) {
      EXPECT_EQ(res.status, LpResult::Status::infeasible) << "trial " << trial;
      continue;
    }
    ASSERT_EQ(res.status, LpResult::Status::optimal) << "trial " << trial;
    expect_feasible(lp, res);
    EXPECT_EQ(res.objective.to_mpq(), *oracle) << "trial " << trial;
    ++solved;
  }
  EXPECT_GT(solved, 10);
}

}  // namespace
