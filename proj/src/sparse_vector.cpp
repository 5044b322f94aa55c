#include "isp/sparse_vector.hpp"

#include <sstream>
#include <stdexcept>

namespace isp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

Int parse_nonneg(std::string_view s, std::string_view whole) {
  s = trim(s);
  Int v;
  if (s.empty() || s.front() == '-' || v.set_str(std::string(s), 10) != 0) {
    throw std::invalid_argument("malformed index in '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

std::string Coord::str() const { return "(" + i.get_str() + "," + std::to_string(j) + ")"; }

Coord Coord::parse(std::string_view text) {
  const std::string_view s = trim(text);
  if (s.size() < 5 || s.front() != '(' || s.back() != ')') {
    throw std::invalid_argument("malformed coordinate: '" + std::string(text) + "'");
  }
  const auto comma = s.find(',');
  if (comma == std::string_view::npos) {
    throw std::invalid_argument("malformed coordinate: '" + std::string(text) + "'");
  }
  const Int row = parse_nonneg(s.substr(1, comma - 1), text);
  const Int col = parse_nonneg(s.substr(comma + 1, s.size() - comma - 2), text);
  if (!col.fits_ulong_p()) throw std::invalid_argument("column index too large: '" + std::string(text) + "'");
  return Coord(row, col.get_ui());
}

SparseVector::SparseVector(std::initializer_list<std::pair<const Coord, Scalar>> init) {
  for (const auto& [c, v] : init) add(c, v);
}

SparseVector SparseVector::unit(const Coord& c, const Scalar& v) {
  SparseVector x;
  x.add(c, v);
  return x;
}

Scalar SparseVector::at(const Coord& c) const {
  const auto it = entries_.find(c);
  return it == entries_.end() ? Scalar(0) : it->second;
}

SparseVector SparseVector::combine(const Scalar& a, const SparseVector& x, const Scalar& b,
                                   const SparseVector& y) {
  SparseVector out;
  if (!a.is_zero()) {
    for (const auto& [c, v] : x.entries_) out.add(c, a * v);
  }
  if (!b.is_zero()) {
    for (const auto& [c, v] : y.entries_) out.add(c, b * v);
  }
  return out;
}

ColumnMap SparseVector::column(std::uint64_t j) const {
  ColumnMap col;
  for (auto it = entries_.lower_bound(Coord(0, j)); it != entries_.end() && it->first.j == j; ++it) {
    col.emplace(it->first.i, it->second);
  }
  return col;
}

std::string SparseVector::str() const {
  std::string out;
  for (const auto& [c, v] : entries_) out += c.str() + " " + v.str() + "\n";
  return out;
}

SparseVector SparseVector::parse(std::string_view text) {
  SparseVector x;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto close = l.find(')');
    if (close == std::string_view::npos) throw std::invalid_argument("malformed vector entry: '" + line + "'");
    const Coord c = Coord::parse(l.substr(0, close + 1));
    if (x.entries_.count(c) != 0) throw std::invalid_argument("duplicate coordinate " + c.str());
    x.add(c, Scalar::parse(l.substr(close + 1)));
  }
  return x;
}

RankMap rank_combine(const Scalar& a, const RankMap& x, const Scalar& b, const RankMap& y) {
  RankMap out;
  if (!a.is_zero()) {
    for (const auto& [k, v] : x) accumulate(out, k, a * v);
  }
  if (!b.is_zero()) {
    for (const auto& [k, v] : y) accumulate(out, k, b * v);
  }
  return out;
}

std::string rank_map_str(const RankMap& m) {
  std::string out;
  for (const auto& [k, v] : m) out += k.get_str() + " " + v.str() + "\n";
  return out;
}

RankMap parse_rank_map(std::string_view text) {
  RankMap m;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    const auto sp = l.find_first_of(" \t");
    if (sp == std::string_view::npos) throw std::invalid_argument("malformed rank entry: '" + line + "'");
    const Int k = parse_nonneg(l.substr(0, sp), line);
    if (m.count(k) != 0) throw std::invalid_argument("duplicate rank " + k.get_str());
    accumulate(m, k, Scalar::parse(l.substr(sp + 1)));
  }
  return m;
}

}  // namespace isp
