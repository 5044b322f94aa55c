#include "isp/weights.hpp"

#include <algorithm>

namespace isp {

namespace {

Int bitlen(const Int& v) { return Int(static_cast<unsigned long>(mpz_sizeinbase(v.get_mpz_t(), 2))); }

Int ipow(const Int& base, unsigned long k) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), k);
  return r;
}

}  // namespace

Int WeightConfig::target(unsigned N, const Int& j) const {
  if (target_override) return target_override(N, j);
  // floor(k log2(j+1)) is one less than the bit length of (j+1)^k.
  return bitlen(ipow(j + 1, static_cast<unsigned long>(gain) * (N + 1))) - 1;
}

WeightTable::WeightTable(WeightConfig config) : config_(std::move(config)) {
  if (config_.gain == 0) throw std::invalid_argument("weight gain must be >= 1");
}

WeightTable::WeightTable(const WeightTable& other) : config_(other.config_) {
  std::lock_guard lock(other.mu_);
  rows_ = other.rows_;
}

bool WeightTable::target_step_at_most_one(unsigned N, std::uint64_t j) const {
  if (config_.target_override) return false;
  const unsigned long k = static_cast<unsigned long>(config_.gain) * (N + 1);
  const Int a(static_cast<unsigned long>(j + 1));
  return ipow(a + 1, k) < 2 * ipow(a, k);
}

const WeightTable::Row& WeightTable::row(unsigned N, const Int& want) const {
  if (rows_.size() <= N) rows_.resize(N + 1);
  Row& r = rows_[N];
  if (r.m.empty()) r.m.push_back(static_cast<std::int64_t>(N));
  while (!r.caught && Int(static_cast<unsigned long>(r.m.size() - 1)) < want) {
    const std::uint64_t j = r.m.size() - 1;
    const std::int64_t m = r.m.back();
    const Int lag(static_cast<long>(m - static_cast<std::int64_t>(N)));
    if (lag == config_.target(N, Int(static_cast<unsigned long>(j))) && target_step_at_most_one(N, j)) {
      r.caught = j;
      break;
    }
    if (r.m.size() >= config_.memo_cap) {
      throw BudgetExhausted("weight row " + std::to_string(N) + " needs more than " +
                            std::to_string(config_.memo_cap) + " memoized entries");
    }
    const Int next_target = config_.target(N, Int(static_cast<unsigned long>(j + 1)));
    r.m.push_back(lag < next_target ? m + 1 : m);
  }
  return r;
}

Int WeightTable::exponent(unsigned N, const Int& j) const {
  if (j < 0) throw std::invalid_argument("negative weight index");
  std::lock_guard lock(mu_);
  const Row& r = row(N, j);
  if (r.caught && j > *r.caught) return Int(N) + config_.target(N, j);
  return Int(static_cast<long>(r.m[j.get_ui()]));
}

std::optional<std::uint64_t> WeightTable::catch_up(unsigned N) const {
  if (config_.target_override) return std::nullopt;
  std::lock_guard lock(mu_);
  // Any want larger than the cap forces the scan to the catch-up point.
  return row(N, Int(static_cast<unsigned long>(config_.memo_cap)) + 1).caught;
}

Int WeightTable::first_index_with_exponent(unsigned N, const Int& e) const {
  if (e <= N) return 0;
  std::lock_guard lock(mu_);
  std::uint64_t want = 64;
  const Row* r = nullptr;
  for (;;) {
    r = &row(N, Int(static_cast<unsigned long>(want)));
    if (e.fits_slong_p()) {
      const auto it = std::lower_bound(r->m.begin(), r->m.end(), e.get_si());
      if (it != r->m.end()) return Int(static_cast<unsigned long>(it - r->m.begin()));
    }
    if (r->caught) break;
    if (want >= config_.memo_cap) {
      throw BudgetExhausted("weight row " + std::to_string(N) + " does not reach exponent " + e.get_str() +
                            " within the memo cap");
    }
    want = std::min<std::uint64_t>(2 * want, config_.memo_cap);
  }
  // Beyond the catch-up point: smallest x = j+1 with x^k >= 2^{e-N}.
  const unsigned long k = static_cast<unsigned long>(config_.gain) * (N + 1);
  const Int power = Int(1) << static_cast<mp_bitcnt_t>(Int(e - N).get_ui());
  Int x;
  mpz_root(x.get_mpz_t(), power.get_mpz_t(), k);
  if (ipow(x, k) < power) x += 1;
  return std::max<Int>(x - 1, Int(static_cast<unsigned long>(*r->caught + 1)));
}

Scalar column_seminorm(const ColumnMap& col, unsigned N, const WeightTable& w) {
  Scalar total;
  for (const auto& [i, v] : col) total += abs(v) * w.weight(N, i);
  return total;
}

Scalar product_seminorm(const SparseVector& x, unsigned N, const WeightTable& w) {
  Scalar total;
  for (const auto& [c, v] : x.entries()) {
    if (c.j <= N) total += abs(v) * w.weight(N, c.i);
  }
  return total;
}

Scalar graded_seminorm(const SparseVector& x, unsigned N, const WeightTable& w) {
  Scalar total;
  for (const auto& [c, v] : x.entries()) total += abs(v) * w.weight(N, c.i);
  return total;
}

std::uint64_t ratio_decay_threshold(unsigned N, const Scalar& eps, std::uint64_t budget, const WeightTable& w) {
  if (!(Scalar(0) < eps)) throw std::invalid_argument("eps must be positive");
  std::uint64_t j0 = budget + 1;
  while (j0 > 0) {
    const Int j(static_cast<unsigned long>(j0 - 1));
    if (Scalar::pow2(w.exponent(N, j) - w.exponent(N + 1, j)) > eps) break;
    --j0;
  }
  if (j0 > budget) {
    throw BudgetExhausted("A_{" + std::to_string(N) + ",j}/A_{" + std::to_string(N + 1) +
                          ",j} is still above " + eps.str() + " at j = " + std::to_string(budget));
  }
  return j0;
}

}  // namespace isp
