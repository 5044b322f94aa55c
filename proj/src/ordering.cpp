#include "isp/ordering.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace isp {

void BParams::validate() const {
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k == 0 && values[0] < 1) throw std::invalid_argument("b_1 must be >= 1");
    if (k > 0 && !(2 * values[k - 1] + 1 < values[k])) {
      throw std::invalid_argument("b sequence violates 2b_n + 1 < b_{n+1} at n = " + std::to_string(k));
    }
  }
}

std::optional<Int> BParams::horizon_row() const {
  if (!next_lower_bound) return std::nullopt;
  Int r = *next_lower_bound;
  if (!values.empty()) r = std::max<Int>(r, 2 * values.back() + 2);
  return r;
}

namespace {

// 1-based index n with b_n == v, or 0.
std::size_t index_of(const std::vector<Int>& b, const Int& v) {
  const auto it = std::lower_bound(b.begin(), b.end(), v);
  if (it == b.end() || *it != v) return 0;
  return static_cast<std::size_t>(it - b.begin()) + 1;
}

}  // namespace

Coord next(const Coord& c, const BParams& b) {
  if (const auto r = b.horizon_row(); r && c.i >= *r) {
    throw HorizonExceeded("successor of " + c.str() + " depends on b values beyond " + r->get_str());
  }
  const Int& i = c.i;
  const std::uint64_t j = c.j;
  const bool even = j % 2 == 0;

  int matched = 0;
  std::optional<Coord> result;
  auto take = [&](Coord to) {
    ++matched;
    if (!result) result = std::move(to);
  };

  // i = b_n, 2 | j, j < 2n
  if (const auto n = index_of(b.values, i); n && even && j < 2 * n) take(Coord(i, j + 1));
  // i = 2b_n + 1, 2 !| j, 0 < j <= 2n
  if (i % 2 == 1) {
    if (const auto n = index_of(b.values, (i - 1) / 2); n && !even && j > 0 && j <= 2 * n) take(Coord(i, j + 1));
  }
  // i = 0, 2 !| j
  if (i == 0 && !even) take(Coord(i, j + 1));
  // i = b_n + 1, 2 !| j, j < 2n
  if (const auto n = index_of(b.values, i - 1); n && !even && j < 2 * n) take(Coord(i, j - 1));
  // i = 2b_n, 2 | j, 0 < j <= 2n
  if (i % 2 == 0) {
    if (const auto n = index_of(b.values, i / 2); n && even && j > 0 && j <= 2 * n) take(Coord(i, j - 1));
  }
  if (matched > 1) {
    throw std::logic_error("Next cases overlap at " + c.str() + "; the b sequence is inconsistent");
  }
  if (result) return *result;
  if (even) return Coord(i + 1, j);
  return Coord(i - 1, j);
}

std::vector<Coord> path_prefix(std::size_t count, const BParams& b) {
  std::vector<Coord> path;
  path.reserve(count);
  if (count == 0) return path;
  path.emplace_back(0, 0);
  while (path.size() < count) path.push_back(next(path.back(), b));
  return path;
}

StageGeometry::StageGeometry(BParams b) : b_(std::move(b)) {
  b_.validate();
  const std::vector<Int> values = b_.values;
  b_.values.clear();
  tail_start_ = 0;
  detour_prefix_.assign(1, Int(0));
  by_column_.assign(1, {});
  for (const Int& v : values) {
    auto keep = b_.next_lower_bound;
    b_.next_lower_bound.reset();
    append(v);
    b_.next_lower_bound = keep;
  }
  if (b_.next_lower_bound && !values.empty() && *b_.next_lower_bound <= 2 * values.back() + 1) {
    b_.next_lower_bound = 2 * values.back() + 2;
  }
}

void StageGeometry::add_run(std::uint64_t col, const Int& from, const Int& to) {
  Run r;
  r.col = col;
  r.first_row = from;
  r.dir = to >= from ? 1 : -1;
  r.length = (r.dir > 0 ? to - from : from - to) + 1;
  r.start = tail_start_;
  tail_start_ += r.length;
  if (by_column_.size() <= col) by_column_.resize(col + 1);
  by_column_[col].push_back(runs_.size());
  runs_.push_back(std::move(r));
}

Int StageGeometry::tail_first_row() const {
  return b_.values.empty() ? Int(0) : Int(b_.values.back() + 1);
}

void StageGeometry::append(const Int& b_next) {
  if (!b_.values.empty() && !(2 * b_.values.back() + 1 < b_next)) {
    throw std::invalid_argument("b_" + std::to_string(b_.values.size() + 1) + " = " + b_next.get_str() +
                                " violates 2b_n + 1 < b_{n+1}");
  }
  if (b_.values.empty() && b_next < 1) throw std::invalid_argument("b_1 must be >= 1");
  if (b_.next_lower_bound && b_next < *b_.next_lower_bound) {
    throw std::invalid_argument("b_" + std::to_string(b_.values.size() + 1) + " = " + b_next.get_str() +
                                " is below the promised lower bound " + b_.next_lower_bound->get_str());
  }
  // Close the open column-0 run at the new b, then lay out its sweep.
  add_run(0, tail_first_row(), b_next);
  b_.values.push_back(b_next);
  build_stage(b_.values.size());
  b_.next_lower_bound = 2 * b_next + 2;
}

void StageGeometry::set_next_lower_bound(std::optional<Int> bound) {
  if (bound && !b_.values.empty() && *bound <= 2 * b_.values.back() + 1) bound = 2 * b_.values.back() + 2;
  b_.next_lower_bound = std::move(bound);
}

void StageGeometry::build_stage(std::size_t n) {
  const Int b = b_.values[n - 1];
  const std::uint64_t top = 2 * n;
  if (n >= 2) {
    const Int lo = 2 * b_.values[n - 2] + 1;
    for (std::uint64_t c = 1; c + 2 <= top; ++c) {
      if (c % 2 == 1) {
        add_run(c, b, lo);
      } else {
        add_run(c, lo, b);
      }
    }
  }
  add_run(top - 1, b, Int(0));
  add_run(top, Int(0), 2 * b);
  for (std::uint64_t c = top - 1; c >= 1; --c) {
    if (c % 2 == 1) {
      add_run(c, 2 * b, b + 1);
    } else {
      add_run(c, b + 1, 2 * b);
    }
  }
  detour_prefix_.push_back(detour_prefix_.back() + detour_length(n));
}

Int StageGeometry::detour_length(std::size_t n) const {
  if (n == 0 || n > b_.values.size()) throw std::out_of_range("no detour for stage " + std::to_string(n));
  const Int& b = b_.values[n - 1];
  const Int lead = n >= 2 ? Int((2 * n - 2) * (b - 2 * b_.values[n - 2])) : Int(0);
  return lead + (b + 1) + (2 * b + 1) + (2 * n - 1) * b;
}

std::optional<Rank> StageGeometry::horizon_rank() const {
  const auto r = b_.horizon_row();
  if (!r) return std::nullopt;
  return tail_start_ + (*r - tail_first_row()) + 1;
}

HorizonExceeded StageGeometry::horizon_error(const std::string& what) const {
  const auto h = horizon_rank();
  std::optional<Int> largest;
  std::string msg = what;
  if (h) {
    largest = *h - 1;
    msg += " (largest valid rank " + largest->get_str() + ")";
  }
  return HorizonExceeded(msg, largest);
}

Coord StageGeometry::rank_to_coord(const Rank& k) const {
  if (k < 0) throw std::invalid_argument("negative rank");
  if (k >= tail_start_) {
    if (const auto h = horizon_rank(); h && k >= *h) {
      throw horizon_error("rank " + k.get_str() + " is beyond the known path");
    }
    return Coord(tail_first_row() + (k - tail_start_), 0);
  }
  const auto it = std::upper_bound(runs_.begin(), runs_.end(), k,
                                   [](const Rank& v, const Run& r) { return v < r.start; });
  const Run& r = *std::prev(it);
  const Int off = k - r.start;
  return Coord(r.dir > 0 ? Int(r.first_row + off) : Int(r.first_row - off), r.col);
}

Rank StageGeometry::coord_to_rank(const Coord& c) const {
  if (c.i < 0) throw std::invalid_argument("negative row");
  if (c.j == 0 && c.i >= tail_first_row()) {
    if (const auto r = b_.horizon_row(); r && c.i > *r) {
      throw horizon_error("coordinate " + c.str() + " is beyond the known path");
    }
    return tail_start_ + (c.i - tail_first_row());
  }
  if (c.j < by_column_.size()) {
    const auto& ids = by_column_[c.j];
    // Runs inside one column are laid out with increasing rows.
    auto it = std::upper_bound(ids.begin(), ids.end(), c.i,
                               [this](const Int& row, std::size_t id) { return row < runs_[id].min_row(); });
    if (it != ids.begin()) {
      const Run& r = runs_[*std::prev(it)];
      if (c.i <= r.max_row()) {
        return r.dir > 0 ? Rank(r.start + (c.i - r.first_row)) : Rank(r.start + (r.first_row - c.i));
      }
    }
  }
  throw horizon_error("coordinate " + c.str() + " is visited beyond the known stages");
}

Rank StageGeometry::pos_column0(const Int& x) const {
  if (x < 0) throw std::invalid_argument("negative row");
  if (const auto r = b_.horizon_row(); r && x > *r) {
    throw horizon_error("pos(" + x.get_str() + ",0) is beyond the known path");
  }
  // Stages whose b_n < x have completed their detour above row x.
  const auto crossed = static_cast<std::size_t>(std::lower_bound(b_.values.begin(), b_.values.end(), x) -
                                                b_.values.begin());
  return x + detour_prefix_[crossed];
}

void write_path_csv(std::ostream& os, const std::vector<Coord>& path) {
  os << "rank,i,j\n";
  for (std::size_t k = 0; k < path.size(); ++k) os << k << "," << path[k].i.get_str() << "," << path[k].j << "\n";
}

void write_path_svg(std::ostream& os, const std::vector<Coord>& path, const BParams& b) {
  constexpr long kCell = 10;
  constexpr long kMargin = 30;
  Int max_row = 0;
  std::uint64_t max_col = 0;
  for (const Coord& c : path) {
    if (c.i > max_row) max_row = c.i;
    max_col = std::max(max_col, c.j);
  }
  const Int width = Int(static_cast<long>(max_col)) * kCell + 2 * kMargin;
  const Int height = max_row * kCell + 2 * kMargin;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width.get_str() << "\" height=\""
     << height.get_str() << "\">\n";
  os << "<polyline fill=\"none\" stroke=\"red\" stroke-width=\"1.5\" points=\"";
  for (std::size_t k = 0; k < path.size(); ++k) {
    const Int x = Int(static_cast<long>(path[k].j)) * kCell + kMargin;
    const Int y = path[k].i * kCell + kMargin;
    os << (k ? " " : "") << x.get_str() << "," << y.get_str();
  }
  os << "\"/>\n";
  for (std::size_t n = 0; n < b.values.size(); ++n) {
    for (int twice = 1; twice <= 2; ++twice) {
      const Int row = b.values[n] * twice;
      if (row > max_row) continue;
      const Int y = row * kCell + kMargin;
      os << "<line x1=\"" << kMargin - 5 << "\" x2=\"" << kMargin + 5 << "\" y1=\"" << y.get_str() << "\" y2=\""
         << y.get_str() << "\" stroke=\"black\"/>\n";
      os << "<text x=\"2\" y=\"" << y.get_str() << "\" font-size=\"8\">" << (twice == 2 ? "2b" : "b") << n + 1
         << "</text>\n";
    }
  }
  os << "</svg>\n";
}

}  // namespace isp
