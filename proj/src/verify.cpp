#include "isp/verify.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

namespace isp {

namespace {

constexpr std::size_t kMaxFailures = 200;

std::string coord_str(const Coord& c) { return c.str(); }

// One-line form "{k: v, ...}".
std::string inline_map(const RankMap& x) {
  std::string out = "{";
  for (const auto& [k, v] : x) {
    if (out.size() > 1) out += ", ";
    out += k.get_str() + ": " + v.str();
  }
  return out + "}";
}

std::string rank_str(const Rank& j) { return "j=" + j.get_str(); }

// ||e_j||_N for the basis vector at rank j.
Scalar basis_product_norm(const OperatorModel& m, const Rank& j, unsigned N) {
  const Coord c = m.geometry().rank_to_coord(j);
  return c.j <= N ? m.weights().weight(N, c.i) : Scalar(0);
}

Scalar basis_graded_norm(const OperatorModel& m, const Rank& j, unsigned N) { return m.rank_weight(N, j); }

Rank min_rank(const Rank& a, const Rank& b) { return a < b ? a : b; }

// Basis ranks j <= jmax below limit, plus the stage boundary ranks A_n - 1 and P_{n+1} - 1.
std::vector<Rank> scan_ranks(const OperatorModel& m, std::uint64_t jmax, const Rank& limit) {
  std::set<Rank> out;
  const Rank top = min_rank(Rank(static_cast<unsigned long>(jmax) + 1), limit);
  for (Rank j = 0; j < top; ++j) out.insert(j);
  for (const auto& st : m.stages()) {
    for (const Rank& r : {Rank(st.pos_a - 1), Rank(st.pos_delta_next - 1), st.pos_a, st.pos_delta}) {
      if (r >= 0 && r < limit) out.insert(r);
    }
  }
  return {out.begin(), out.end()};
}

Scalar random_scalar(std::mt19937_64& rng) {
  const long num = static_cast<long>(rng() % 41) - 20;
  const long den = static_cast<long>(rng() % 9) + 1;
  return Scalar::fraction(num == 0 ? 1 : num, den);
}

Rank random_rank(std::mt19937_64& rng, const Rank& lo, const Rank& hi) {
  // Uniform enough for sampling: hi - lo fits in 64 bits for every constructible stage.
  const Rank span = hi - lo;
  return lo + static_cast<unsigned long>(rng() % span.get_ui());
}

// ---- suites ----------------------------------------------------------------

void weight_family(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  const WeightTable& w = m.weights();
  for (unsigned N = 0; N <= r.weight_Nmax; ++N) {
    Int prev_e;
    for (std::uint64_t j = 0; j <= r.jmax; ++j) {
      const Int J(static_cast<unsigned long>(j));
      const Int e = w.exponent(N, J);
      const Int e_up = w.exponent(N + 1, J);
      const std::string inst = "N=" + std::to_string(N) + " j=" + std::to_string(j);
      rep.record_le("weight >= 1", inst, Scalar(1), Scalar::pow2(e));
      rep.record("strictly increasing in N", inst, "2^" + e.get_str(), "2^" + e_up.get_str(), e < e_up);
      if (j > 0) {
        rep.record_le("non-decreasing in j", inst, Scalar::pow2(prev_e), Scalar::pow2(e));
        rep.record_le("A_{N,j}/A_{N,j-1} <= 2", inst, Scalar::pow2(e), Scalar(2) * Scalar::pow2(prev_e));
      }
      prev_e = e;
    }
  }
  for (unsigned N = 0; N <= 4; ++N) {
    const Int j = w.first_index_with_exponent(N, Int(61));
    rep.record("exceeds 2^60 in j", "N=" + std::to_string(N) + " j=" + j.get_str(),
               "2^" + w.exponent(N, j).get_str(), "> 2^60", w.exponent(N, j) >= 61);
  }
  rep.record("exceeds 2^60 in N", "N=61 j=0", "2^" + w.exponent(61, Int(0)).get_str(), "> 2^60",
             w.exponent(61, Int(0)) >= 61);
  constexpr std::uint64_t budget = 100000;
  for (unsigned N = 0; N <= 8; ++N) {
    const std::string inst = "N=" + std::to_string(N);
    try {
      const auto j0 = ratio_decay_threshold(N, Scalar::pow2(-6), budget, w);
      rep.record("ratio A_N/A_{N+1} <= 1/64 beyond threshold", inst, "threshold " + std::to_string(j0),
                 "<= " + std::to_string(budget), true);
    } catch (const BudgetExhausted& e) {
      rep.record("ratio A_N/A_{N+1} <= 1/64 beyond threshold", inst, e.what(), "<= " + std::to_string(budget), false);
    }
    // 2^j / A_{N,j} >= 2^{ceil(j/2)}  <=>  j - m(N,j) >= ceil(j/2)
    std::uint64_t j0 = budget + 1;
    while (j0 > 0) {
      const std::uint64_t j = j0 - 1;
      if (Int(static_cast<unsigned long>(j)) - w.exponent(N, Int(static_cast<unsigned long>(j))) <
          Int(static_cast<unsigned long>((j + 1) / 2)))
        break;
      --j0;
    }
    rep.record("2^j/A_{N,j} >= 2^ceil(j/2) beyond threshold", inst, "threshold " + std::to_string(j0),
               "< " + std::to_string(budget), j0 < budget);
  }
}

void operator_table(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  const Rank H = m.rank_horizon();
  std::size_t skipped = 0;
  for (const Rank& j : scan_ranks(m, r.jmax, H)) {
    RankMap image;
    try {
      image = m.apply_basis(j);
    } catch (const HorizonExceeded&) {
      ++skipped;
      continue;
    }
    ++rep.census[rank_case_name(m.classify(j))];
    const RankMap via_gamma = m.ranks_from_gamma(shift_ranks(m.gamma_from_ranks({{j, Scalar(1)}}), Rank(1)));
    rep.record_eq("table agrees with gamma shift", rank_str(j), inline_map(image), inline_map(via_gamma));
    const Rank next = j + 1;
    const bool shape = !image.empty() && image.rbegin()->first == next && !image.rbegin()->second.is_zero();
    rep.record("forward shift shape", rank_str(j), "top rank " + (image.empty() ? std::string("-") : image.rbegin()->first.get_str()),
               next.get_str(), shape);
  }
  rep.record("five cases exercised", "census", std::to_string(rep.census.size()) + " cases", "5", rep.census.size() == 5);
  // Iterated application against the closed form.
  const Rank J = min_rank(Rank(H - 1), Rank(static_cast<unsigned long>(r.jmax)));
  RankMap x{{Rank(0), Scalar(1)}};
  for (Rank j = 1; j <= J; ++j) {
    x = m.apply_ranks(x);
    rep.record_eq("iterated T equals closed form", rank_str(j), inline_map(x), inline_map(m.power_e0(j)));
  }
  if (skipped) rep.note = std::to_string(skipped) + " rank(s) need the next stage and were skipped";
}

void position_identity(SuiteReport& rep, const OperatorModel& m, const VerifyRanges&) {
  const StageGeometry& g = m.geometry();
  for (const auto& st : m.stages()) {
    const std::string inst = "n=" + std::to_string(st.index);
    rep.record_eq("P_{n+1} = A_n + P_n", inst, st.pos_delta_next.get_str(), Rank(st.pos_a + st.pos_delta).get_str());
    rep.record_eq("rank of (Delta_n,0)", inst, coord_str(g.rank_to_coord(st.pos_delta)), coord_str({st.delta, 0}));
    rep.record_eq("rank of (a_n,0)", inst, coord_str(g.rank_to_coord(st.pos_a)), coord_str({st.a, 0}));
    rep.record_eq("Delta_{n+1} = a_n + P_n", inst, st.delta_next.get_str(), Int(st.a + st.pos_delta).get_str());
  }
}

void neighbour_growth(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  const Rank H = m.rank_horizon();
  for (const Rank& j : scan_ranks(m, r.jmax, Rank(H - 1))) {
    for (unsigned N = 0; N <= r.Nmax; ++N) {
      rep.record_le("||e_{j+1}||_N <= 2||e_j||_{N+1}", rank_str(j) + " N=" + std::to_string(N),
                    basis_product_norm(m, Rank(j + 1), N), Scalar(2) * basis_product_norm(m, j, N + 1));
    }
  }
}

void continuity(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  const Rank H = m.rank_horizon();
  for (const Rank& j : scan_ranks(m, r.jmax, H)) {
    RankMap image;
    try {
      image = m.apply_basis(j);
    } catch (const HorizonExceeded&) {
      continue;
    }
    for (unsigned N = 0; N <= r.Nmax; ++N) {
      const std::string inst = rank_str(j) + " N=" + std::to_string(N);
      rep.record_le("||Te_j||_N <= 4||e_j||_{N+1}", inst, product_seminorm(image, N, m),
                    Scalar(4) * basis_product_norm(m, j, N + 1));
      rep.record_le("|||Te_j|||_N <= 4|||e_j|||_N", inst, graded_seminorm(image, N, m),
                    Scalar(4) * basis_graded_norm(m, j, N));
    }
  }
}

RankMap tau_expected(const OperatorModel& m, std::size_t n, const Rank& j) {
  const auto& st = m.stage(n);
  if (j < st.pos_a) return {{j, Scalar(1)}};
  RankMap out;
  const Scalar f = -st.eps.reciprocal();
  for (const auto& [k, v] : m.power_e0(j - st.pos_a)) out.emplace(k, f * v);
  return out;
}

void tau_values(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  std::mt19937_64 rng(r.seed);
  for (std::size_t n = 0; n < m.stage_count(); ++n) {
    const auto& st = m.stage(n);
    std::vector<Rank> ranks;
    if (n == 0 || st.pos_delta_next <= static_cast<unsigned long>(r.jmax)) {
      for (Rank j = 0; j < st.pos_delta_next; ++j) ranks.push_back(j);
    } else {
      for (std::size_t t = 0; t < r.samples; ++t) ranks.push_back(random_rank(rng, Rank(0), st.pos_delta_next));
      ranks.push_back(st.pos_a);
      ranks.push_back(Rank(st.pos_a - 1));
      ranks.push_back(Rank(st.pos_delta_next - 1));
    }
    for (const Rank& j : ranks) {
      rep.record_eq("tau_n e_j", "n=" + std::to_string(n) + " " + rank_str(j),
                    inline_map(tau(n, RankMap{{j, Scalar(1)}}, m)), inline_map(tau_expected(m, n, j)));
    }
  }
}

void tau_bound(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  std::mt19937_64 rng(r.seed + 1);
  for (std::size_t n = 0; n < m.stage_count(); ++n) {
    const auto& st = m.stage(n);
    const unsigned N = st.level;
    auto check = [&](const std::string& inst, const RankMap& x) {
      rep.record_le("|||tau_n x|||_0 <= |||x|||_{N_n+1}", inst, graded_seminorm(tau(n, x, m), 0, m),
                    graded_seminorm(x, N + 1, m));
    };
    if (st.pos_delta_next <= static_cast<unsigned long>(r.jmax)) {
      for (Rank j = 0; j < st.pos_delta_next; ++j) check("n=" + std::to_string(n) + " e_" + j.get_str(), {{j, Scalar(1)}});
    }
    for (std::size_t t = 0; t < r.samples; ++t) {
      RankMap x;
      const int terms = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < terms; ++k) accumulate(x, random_rank(rng, Rank(0), st.pos_delta_next), random_scalar(rng));
      if (x.empty()) continue;
      check("n=" + std::to_string(n) + " x=" + inline_map(x), x);
    }
  }
}

void heads(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  std::mt19937_64 rng(r.seed + 2);
  std::set<unsigned> levels;
  for (const auto& st : m.stages()) levels.insert(st.level);
  for (unsigned N : levels) {
    for (std::size_t t = 0; t < r.samples; ++t) {
      RankMap xr;
      const int terms = 1 + static_cast<int>(rng() % 4);
      for (int k = 0; k < terms; ++k) accumulate(xr, random_rank(rng, Rank(0), m.stage(0).pos_a), random_scalar(rng));
      if (xr.empty()) continue;
      const SparseVector x = m.to_coord_form(xr);
      const std::uint64_t k0 = x.entries().begin()->first.j;
      const SparseVector xs = (Scalar(2) / column_seminorm(x.column(k0), 0, m.weights())) * x;
      const std::string inst = "N=" + std::to_string(N) + " x=" + inline_map(xr);
      try {
        const HeadChoice h = head_qualify(xs, N, m);
        rep.record("scaled head lies in m K_n", inst, "n=" + std::to_string(h.n) + " m=" + h.scale.get_str(), "qualifies",
                   true);
      } catch (const Unresolved& e) {
        rep.record("scaled head lies in m K_n", inst, e.what(), "qualifies", false);
      }
    }
  }
}

void shift_growth(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  // For stage n: j >= P_{n+1} and 1 <= i <= P_{n+1}.
  for (const auto& st : m.stages()) {
    const Rank cut = st.pos_delta_next;
    std::vector<Rank> powers;
    for (Rank a = 1, b = 2; a < cut; b += a, a = b - a) powers.push_back(a);
    powers.push_back(cut);
    const std::string tag = "n=" + std::to_string(st.index) + " ";
    for (const Rank& i : powers) {
      const Scalar factor = Scalar::pow2(Int(i));
      for (Rank j = cut; j < cut + static_cast<unsigned long>(r.jmax); ++j) {
        std::vector<Scalar> up_norm(r.Nmax + 1);
        try {
          for (unsigned N = 0; N <= r.Nmax; ++N) up_norm[N] = basis_product_norm(m, Rank(j + i), N);
        } catch (const HorizonExceeded&) {
          break;
        }
        for (unsigned N = 0; N <= r.Nmax; ++N) {
          rep.record_le("||e_{i+j}||_N <= 2^i ||e_j||_{N+1}",
                        tag + "i=" + i.get_str() + " " + rank_str(j) + " N=" + std::to_string(N), up_norm[N],
                        factor * basis_product_norm(m, j, N + 1));
        }
      }
    }
  }
}

void tails(SuiteReport& rep, const OperatorModel& m, const VerifyRanges& r) {
  std::mt19937_64 rng(r.seed + 3);
  for (std::size_t n = 0; n + 1 < m.stage_count(); ++n) {
    const auto& st = m.stage(n);
    if (!st.log2_D) continue;
    const Rank cut = st.pos_delta_next;
    const Rank far = m.stage(n + 1).pos_delta_next;
    if (far <= cut + cut) continue;
    const Rank hi = far - cut;  // j + i stays below the horizon
    const std::string tag = "n=" + std::to_string(n) + " ";
    std::vector<std::pair<Rank, Rank>> pairs;
    for (unsigned long k = 0; k < 5; ++k) pairs.emplace_back(Rank(1 + k % cut.get_ui()), Rank(cut + k));
    while (pairs.size() < 200) pairs.emplace_back(random_rank(rng, Rank(1), Rank(cut + 1)), random_rank(rng, cut, hi));
    std::size_t zero_column = 0, decay = 0;
    const auto& next = m.stage(n + 1);
    for (const auto& [i, j] : pairs) {
      const TailReport t = tail_bound_check(m.to_coord_form({{j, Scalar(1)}}), n, m, {i});
      const TailCheck& c = t.basis.front();
      const std::string inst = tag + "i=" + i.get_str() + " " + rank_str(j);
      rep.record_le("||T^i e_j||_{N_n} <= ||e_j||_{N_n+2}/D_n", inst, c.lhs, c.rhs);
      if (m.geometry().rank_to_coord(j).j >= st.level + 2) {
        ++zero_column;
        rep.record("zero-column case has lhs 0", inst, c.lhs.str(), "0", c.lhs.is_zero());
      }
      if (j >= next.pos_delta && Rank(j + i) < Rank(*next.pos_s - next.pos_delta)) {
        ++decay;
        rep.record_eq("pure-decay ratio alpha_{i+j}/alpha_j", inst, (m.alpha(Rank(i + j)) / m.alpha(j)).str(),
                      Scalar::pow2(Int(-i * (1 + *st.log2_D))).str());
      }
    }
    rep.record("pure-decay and zero-column cases present", tag.substr(0, tag.size() - 1),
               std::to_string(decay) + " decay, " + std::to_string(zero_column) + " zero-column", ">0 each",
               decay > 0 && zero_column > 0);
    std::vector<Rank> powers;
    for (Rank i = 1; i <= cut && powers.size() < 64; ++i) powers.push_back(i);
    for (int t = 0; t < 20; ++t) {
      RankMap x;
      for (int k = 0; k < 4; ++k) accumulate(x, random_rank(rng, cut, hi), random_scalar(rng));
      const TailReport rpt = tail_bound_check(m.to_coord_form(x), n, m, powers);
      rep.record_le("max_i ||T^i x||_{N_n} <= ||x||_{N_n+2}/D_n", tag + "x=" + inline_map(x), rpt.aggregate_lhs,
                    rpt.aggregate_rhs);
    }
  }
}

struct SuiteDef {
  std::string id;
  std::string subject;
  bool growth_dependent;
  std::function<void(SuiteReport&, const OperatorModel&, const VerifyRanges&)> run;
};

const std::vector<SuiteDef>& suites() {
  static const std::vector<SuiteDef> defs = {
      {"prop2.1", "weight family: positivity, monotonicity, ratio <= 2, decay witnesses, unboundedness", false,
       weight_family},
      {"eq-pos", "position identity P_{n+1} = A_n + P_n and stage anchors", false, position_identity},
      {"prop7.1", "five-case table for T e_j, forward-shift shape, closed form of T^j e_0", false, operator_table},
      {"lemma8.1", "neighbour growth ||e_{j+1}||_N <= 2||e_j||_{N+1}", false, neighbour_growth},
      {"prop8.2", "continuity ||Tx||_N <= 4||x||_{N+1} and |||Tx|||_N <= 4|||x|||_N on basis vectors", true,
       continuity},
      {"lemma9.1", "values of tau_n on basis vectors", false, tau_values},
      {"prop9.2", "|||tau_n x|||_0 <= |||x|||_{N_n+1}", true, tau_bound},
      {"prop10.1", "scaled heads qualify for some m K_n", true, heads},
      {"lemma11.1", "||e_{i+j}||_N <= 2^i ||e_j||_{N+1} for j >= P_{n+1}, 1 <= i <= P_{n+1}", true, shift_growth},
      {"prop11.2", "tail estimate ||T^i x||_{N_n} <= ||x||_{N_n+2}/D_n", true, tails},
  };
  return defs;
}

}  // namespace

GroupSummary& SuiteReport::group_of(const std::string& group) {
  for (auto& g : groups) {
    if (g.group == group) return g;
  }
  groups.emplace_back();
  groups.back().group = group;
  return groups.back();
}

void SuiteReport::record(const std::string& group, const std::string& instance, const std::string& lhs,
                         const std::string& rhs, bool pass) {
  GroupSummary& g = group_of(group);
  ++g.count;
  if (pass) ++g.passed;
  if (!pass && failures.size() < kMaxFailures) failures.push_back({group, instance, lhs, rhs, false});
  if (!g.tightest || (!pass && g.tightest->pass)) g.tightest = CheckRecord{group, instance, lhs, rhs, pass};
}

void SuiteReport::record_le(const std::string& group, const std::string& instance, const Scalar& lhs,
                            const Scalar& rhs) {
  const bool pass = lhs <= rhs;
  GroupSummary& g = group_of(group);
  ++g.count;
  if (pass) ++g.passed;
  if (!pass && failures.size() < kMaxFailures) failures.push_back({group, instance, lhs.str(), rhs.str(), false});
  // Tightness: lhs/rhs, with 0/0 counted as 0 and x/0 as infinite.
  std::optional<Scalar> ratio;
  if (!rhs.is_zero()) ratio = lhs / rhs;
  else if (lhs.is_zero()) ratio = Scalar(0);
  const bool tighter = !g.tightest || (!ratio && g.tightest_ratio) ||
                       (ratio && g.tightest_ratio && *ratio > *g.tightest_ratio);
  if (tighter) {
    g.tightest = CheckRecord{group, instance, lhs.str(), rhs.str(), pass};
    g.tightest_ratio = ratio;
  }
}

void SuiteReport::record_eq(const std::string& group, const std::string& instance, const std::string& lhs,
                            const std::string& rhs) {
  record(group, instance, lhs, rhs, lhs == rhs);
}

std::size_t SuiteReport::count() const {
  std::size_t c = 0;
  for (const auto& g : groups) c += g.count;
  return c;
}

std::size_t SuiteReport::passed() const {
  std::size_t c = 0;
  for (const auto& g : groups) c += g.passed;
  return c;
}

std::string SuiteReport::verdict() const {
  if (ok()) return "PASS";
  return toy && growth_dependent ? "EXPECTED-FAIL" : "FAIL";
}

const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = [] {
    std::vector<std::string> out;
    for (const auto& s : suites()) out.push_back(s.id);
    return out;
  }();
  return ids;
}

SuiteReport run_verification_suite(const std::string& id, const OperatorModel& model, const VerifyRanges& ranges) {
  for (const auto& s : suites()) {
    if (s.id != id) continue;
    SuiteReport rep;
    rep.suite = s.id;
    rep.subject = s.subject;
    rep.growth_dependent = s.growth_dependent;
    rep.toy = model.mode() == Mode::toy;
    s.run(rep, model, ranges);
    return rep;
  }
  throw std::invalid_argument("unknown suite '" + id + "'");
}

std::string format_reports(const std::vector<SuiteReport>& reports, const VerifyRanges& ranges,
                           const std::string& params_hash) {
  std::ostringstream out;
  out << "isp-verify v1\n";
  out << "params-sha256 " << (params_hash.empty() ? "-" : params_hash) << '\n';
  out << "ranges jmax=" << ranges.jmax << " Nmax=" << ranges.Nmax << " weight_Nmax=" << ranges.weight_Nmax
      << " seed=" << ranges.seed << " samples=" << ranges.samples << '\n';
  std::size_t failed = 0, expected = 0;
  for (const auto& r : reports) {
    const std::string v = r.verdict();
    if (v == "FAIL") ++failed;
    if (v == "EXPECTED-FAIL") ++expected;
    out << "suite " << r.suite << " verdict=" << v << " instances=" << r.count() << " passed=" << r.passed() << '\n';
    out << "  checks " << r.subject << '\n';
    if (!r.note.empty()) out << "  note " << r.note << '\n';
    for (const auto& g : r.groups) {
      out << "  group \"" << g.group << "\" count=" << g.count << " passed=" << g.passed << '\n';
      if (g.tightest) {
        out << "    tightest " << g.tightest->instance << " lhs=" << g.tightest->lhs << " rhs=" << g.tightest->rhs
            << " " << (g.tightest->pass ? "pass" : "fail") << '\n';
      }
    }
    for (const auto& [k, c] : r.census) out << "  census " << k << ' ' << c << '\n';
    for (const auto& f : r.failures) {
      out << "  fail \"" << f.group << "\" " << f.instance << " lhs=" << f.lhs << " rhs=" << f.rhs << '\n';
    }
  }
  out << "summary suites=" << reports.size() << " failed=" << failed << " expected-fail=" << expected << '\n';
  return out.str();
}

std::string summary_json(const std::vector<SuiteReport>& reports, const VerifyRanges& ranges,
                         const std::string& params_hash) {
  nlohmann::ordered_json j;
  j["format"] = "isp-verify-summary v1";
  j["params_sha256"] = params_hash;
  j["seed"] = ranges.seed;
  j["jmax"] = ranges.jmax;
  j["Nmax"] = ranges.Nmax;
  auto& arr = j["suites"] = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json s;
    s["suite"] = r.suite;
    s["verdict"] = r.verdict();
    s["instances"] = r.count();
    s["passed"] = r.passed();
    s["failed"] = r.count() - r.passed();
    arr.push_back(s);
  }
  return j.dump(2) + "\n";
}

}  // namespace isp
