#pragma once

// Coordinates, ranks and finitely supported vectors of the countable product
// of sequence spaces.  A basis vector e_{i,j} sits in row i of column (copy) j.

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "isp/scalar.hpp"

namespace isp {

/// Position k in the snake enumeration of N x N.
using Rank = Int;

struct Coord {
  Int i;            // row inside one copy
  std::uint64_t j;  // column / copy index

  Coord() : i(0), j(0) {}
  Coord(Int row, std::uint64_t col) : i(std::move(row)), j(col) {}
  Coord(long row, std::uint64_t col) : i(row), j(col) {}

  friend bool operator==(const Coord& a, const Coord& b) { return a.j == b.j && a.i == b.i; }
  /// Column-major: all of column 0 first, then column 1, ...
  friend std::strong_ordering operator<=>(const Coord& a, const Coord& b) {
    if (a.j != b.j) return a.j <=> b.j;
    const int c = cmp(a.i, b.i);
    return c <=> 0;
  }

  std::string str() const;
  static Coord parse(std::string_view text);
};

/// Column slice: row index -> coefficient.
using ColumnMap = std::map<Int, Scalar>;
/// Coefficients indexed by rank (gamma-coordinates, polynomials, rank-form vectors).
using RankMap = std::map<Rank, Scalar>;

/// Adds v into m[key], erasing the entry if it cancels.
template <class Map>
void accumulate(Map& m, const typename Map::key_type& key, const Scalar& v) {
  if (v.is_zero()) return;
  auto [it, inserted] = m.try_emplace(key, v);
  if (!inserted) {
    it->second += v;
    if (it->second.is_zero()) m.erase(it);
  }
}

class SparseVector {
 public:
  using Entries = std::map<Coord, Scalar>;

  SparseVector() = default;
  SparseVector(std::initializer_list<std::pair<const Coord, Scalar>> init);

  static SparseVector unit(const Coord& c, const Scalar& v = Scalar(1));

  const Entries& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  Scalar at(const Coord& c) const;
  void add(const Coord& c, const Scalar& v) { accumulate(entries_, c, v); }

  /// a*x + b*y with zero entries dropped.
  static SparseVector combine(const Scalar& a, const SparseVector& x, const Scalar& b,
                              const SparseVector& y);

  ColumnMap column(std::uint64_t j) const;

  SparseVector operator-() const { return combine(Scalar(0), {}, Scalar(-1), *this); }
  friend SparseVector operator+(const SparseVector& x, const SparseVector& y) {
    return combine(Scalar(1), x, Scalar(1), y);
  }
  friend SparseVector operator-(const SparseVector& x, const SparseVector& y) {
    return combine(Scalar(1), x, Scalar(-1), y);
  }
  friend SparseVector operator*(const Scalar& a, const SparseVector& x) {
    return combine(a, x, Scalar(0), {});
  }
  friend bool operator==(const SparseVector&, const SparseVector&) = default;

  /// Canonical text, one "(i,j) value" entry per line in column-major order.
  std::string str() const;
  static SparseVector parse(std::string_view text);

 private:
  Entries entries_;
};

/// vec_combine: a*x + b*y.
inline SparseVector vec_combine(const Scalar& a, const SparseVector& x, const Scalar& b,
                                const SparseVector& y) {
  return SparseVector::combine(a, x, b, y);
}

/// column_slice: entries of x in column j.
inline ColumnMap column_slice(const SparseVector& x, std::uint64_t j) { return x.column(j); }

RankMap rank_combine(const Scalar& a, const RankMap& x, const Scalar& b, const RankMap& y);

std::string rank_map_str(const RankMap& m);
RankMap parse_rank_map(std::string_view text);

}  // namespace isp
