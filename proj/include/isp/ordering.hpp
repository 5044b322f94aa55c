#pragma once

// The snake enumeration Next of N x N and its rank function pos.
//
// The path runs down column 0 until it meets b_n, then sweeps columns 1..2n
// in vertical runs and re-enters column 0 at row b_n + 1.  The sweep for b_n
// covers rows (2b_{n-1}, 2b_n] of columns 1..2n-2 and rows [0, 2b_n] of
// columns 2n-1 and 2n.  StageGeometry stores that path as a table of vertical
// runs so both directions of the rank <-> coordinate bijection cost a binary
// search instead of k iterations.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "isp/errors.hpp"
#include "isp/sparse_vector.hpp"

namespace isp {

/// The strictly increasing sequence b_1 < b_2 < ... with 2b_n + 1 < b_{n+1}.
///
/// When `next_lower_bound` is empty the list is the whole sequence and
/// column 0 continues downward forever after the last detour.  Otherwise the
/// next, still unknown, value is promised to be >= next_lower_bound, which
/// caps what the path determines.
struct BParams {
  std::vector<Int> values;
  std::optional<Int> next_lower_bound;

  /// Throws std::invalid_argument on a sequence violating 2b_n + 1 < b_{n+1}.
  void validate() const;
  /// Smallest row of column 0 whose successor is not determined (open lists only).
  std::optional<Int> horizon_row() const;
};

/// Successor of c; evaluates the six cases in order and asserts that at most
/// one special case matches.
Coord next(const Coord& c, const BParams& b);

/// The first `count` coordinates of the path starting at (0,0).
std::vector<Coord> path_prefix(std::size_t count, const BParams& b);

class StageGeometry {
 public:
  StageGeometry() : StageGeometry(BParams{}) {}
  explicit StageGeometry(BParams b);

  const BParams& params() const { return b_; }

  /// Appends b_{n+1}; it must respect the previously promised lower bound.
  void append(const Int& b_next);
  /// Replaces the promise about the next b (may only tighten upward, or close).
  void set_next_lower_bound(std::optional<Int> bound);

  /// Exclusive upper bound of known ranks; empty when unbounded.
  std::optional<Rank> horizon_rank() const;

  Coord rank_to_coord(const Rank& k) const;
  Rank coord_to_rank(const Coord& c) const;
  /// pos(x, 0) from the per-stage detour lengths.
  Rank pos_column0(const Int& x) const;

  /// Number of cells strictly between (b_n,0) and (b_n+1,0) on the path, n >= 1.
  Int detour_length(std::size_t n) const;
  std::size_t run_count() const { return runs_.size(); }

 private:
  struct Run {
    std::uint64_t col;
    Int first_row;  // row of the first cell visited
    int dir;        // +1 walking down, -1 walking up
    Int length;     // number of cells
    Rank start;     // rank of the first cell
    Int min_row() const { return dir > 0 ? first_row : first_row - length + 1; }
    Int max_row() const { return dir > 0 ? first_row + length - 1 : first_row; }
  };

  void add_run(std::uint64_t col, const Int& from, const Int& to);
  void build_stage(std::size_t n);
  Int tail_first_row() const;
  HorizonExceeded horizon_error(const std::string& what) const;

  BParams b_;
  std::vector<Run> runs_;  // everything before the final open column-0 run
  std::vector<std::vector<std::size_t>> by_column_;
  std::vector<Int> detour_prefix_;  // detour_prefix_[n] = sum of detours of stages 1..n
  Rank tail_start_;
};

/// CSV rows "rank,i,j" of the path prefix.
void write_path_csv(std::ostream& os, const std::vector<Coord>& path);
/// SVG polyline of the path, columns horizontal and rows growing downward.
void write_path_svg(std::ostream& os, const std::vector<Coord>& path, const BParams& b);

}  // namespace isp
