#include "isp/stages.hpp"

#include <algorithm>

namespace isp {

const char* status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::holds:
      return "holds";
    case CheckStatus::fails:
      return "fails";
    case CheckStatus::unchecked:
      return "unchecked";
  }
  return "?";
}

CheckStatus parse_status(std::string_view s) {
  if (s == "holds") return CheckStatus::holds;
  if (s == "fails") return CheckStatus::fails;
  if (s == "unchecked") return CheckStatus::unchecked;
  throw std::invalid_argument("unknown condition status '" + std::string(s) + "'");
}

bool ConditionReport::all_hold() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ConditionCheck& c) { return !c.applicable || c.status == CheckStatus::holds; });
}

const ConditionCheck& ConditionReport::get(std::string_view id) const {
  for (const auto& c : checks) {
    if (c.id == id) return c;
  }
  throw std::out_of_range("no condition '" + std::string(id) + "'");
}

namespace {

std::string pow2_str(const Int& e) { return Scalar::pow2(e).str(); }

ConditionCheck exponent_check(std::string id, const Int& lhs_exp, const Int& rhs_exp, std::string range) {
  ConditionCheck c;
  c.id = std::move(id);
  c.lhs = pow2_str(lhs_exp);
  c.rhs = pow2_str(rhs_exp);
  c.range = std::move(range);
  c.status = lhs_exp <= rhs_exp ? CheckStatus::holds : CheckStatus::fails;
  return c;
}

ConditionCheck not_applicable(std::string id) {
  ConditionCheck c;
  c.id = std::move(id);
  c.status = CheckStatus::unchecked;
  c.applicable = false;
  c.note = "n/a at stage 0";
  return c;
}

Int bitlen(const Int& v) { return Int(static_cast<unsigned long>(mpz_sizeinbase(v.get_mpz_t(), 2))); }

// m(N+2,k) - m(N+1,k)
Int gap(const WeightTable& w, unsigned N, const Int& k) { return w.exponent(N + 2, k) - w.exponent(N + 1, k); }

// Past both catch-up indices the gap is at least bitlen(k+1); returns the k from
// which that bound alone guarantees gap >= req, or nothing without a closed form.
std::optional<Int> certificate_start(const WeightTable& w, unsigned N, const Int& req) {
  const auto c1 = w.catch_up(N + 1);
  const auto c2 = w.catch_up(N + 2);
  if (!c1 || !c2) return std::nullopt;
  const Int caught(static_cast<unsigned long>(std::max(*c1, *c2)));
  const Int by_length = req <= 1 ? Int(0) : Int((Int(1) << static_cast<mp_bitcnt_t>(Int(req - 1).get_ui())) - 1);
  return std::max(caught, by_length);
}

ConditionCheck check_2bn(const WeightTable& w, unsigned N, const Int& req, const Int& b, const ConditionOptions& opt) {
  ConditionCheck c;
  c.id = "2bn";
  const auto kstar = certificate_start(w, N, req);
  const Int window_end = b + Int(static_cast<unsigned long>(opt.window));
  Int hi = window_end;
  bool covered = false;
  if (kstar && Int(std::max(*kstar, window_end) - b) <= Int(static_cast<unsigned long>(opt.max_exact_scan))) {
    hi = std::max(*kstar, window_end);
    covered = true;
  }
  std::optional<Int> worst;
  Int worst_slack;
  for (Int k = b; k <= hi; ++k) {
    const Int slack = gap(w, N, k) - req;
    if (!worst || slack < worst_slack) {
      worst = k;
      worst_slack = slack;
    }
    if (slack < 0) break;
  }
  const Int& k = *worst;
  c.lhs = pow2_str(req + w.exponent(N + 1, k));
  c.rhs = pow2_str(w.exponent(N + 2, k));
  c.note = "tightest k = " + k.get_str() + "; A_{" + std::to_string(N + 2) + ",b}/A_{" + std::to_string(N + 1) +
           ",b} = " + pow2_str(gap(w, N, b));
  if (worst_slack < 0) {
    c.status = CheckStatus::fails;
    c.range = "[" + b.get_str() + ", " + k.get_str() + "] exact";
    return c;
  }
  if (covered) {
    // Frontier of the certificate: the bitlen bound itself, checked exactly.
    const bool frontier = gap(w, N, *kstar) >= bitlen(*kstar + 1) && bitlen(*kstar + 1) >= req;
    c.status = frontier ? CheckStatus::holds : CheckStatus::fails;
    c.range = "[" + b.get_str() + ", " + hi.get_str() + "] exact; k > " + hi.get_str() +
              " by gap >= bitlen(k+1) past catch-up";
  } else {
    c.status = CheckStatus::unchecked;
    c.range = "[" + b.get_str() + ", " + hi.get_str() + "] exact";
    c.note += kstar ? "; certificate starts at k = " + (bitlen(*kstar) > 64 ? "2^" + Int(bitlen(*kstar) - 1).get_str() + "+"
                                                                           : kstar->get_str()) +
                          ", beyond the exact window"
                    : "; no closed form for an overridden target";
  }
  return c;
}

// Exponent of the cond1 quotient; alpha_{A_n - 1} has the same exponent.
Int cond1_exponent(const Int& A, const Int& S, const Int& P, const Int& m_a, const Int& step) {
  return (A - S - 1) - m_a - step * (S - P - 1);
}

}  // namespace

ConditionReport evaluate_conditions(const OperatorModel& model, std::size_t n, const ConditionOptions& opt) {
  const StageParams& st = model.stage(n);
  const WeightTable& w = model.weights();
  const unsigned N = st.level;
  const Int m_a = w.exponent(N, st.a);
  ConditionReport r;
  r.stage = n;
  const Int A = st.pos_a;
  const Int P = st.pos_delta;

  if (n == 0) {
    r.checks.push_back(not_applicable("pos_bn"));
    r.checks.push_back(not_applicable("2bn"));
    r.checks.push_back(not_applicable("cond1"));
    r.checks.push_back(not_applicable("cond2"));
  } else {
    const StageParams& prev = model.stage(n - 1);
    const Int d = *prev.log2_D;
    const unsigned Np = prev.level;
    ConditionCheck pos_bn;
    pos_bn.id = "pos_bn";
    pos_bn.lhs = Int(2 * (P - 1)).get_str();
    pos_bn.rhs = st.b->get_str() + " <= " + st.pos_b->get_str();
    pos_bn.range = "single";
    pos_bn.status = 2 * (P - 1) <= *st.b && *st.b <= *st.pos_b ? CheckStatus::holds : CheckStatus::fails;
    r.checks.push_back(pos_bn);
    r.checks.push_back(check_2bn(w, Np, 2 * P + d, *st.b, opt));
    const Int e1 = cond1_exponent(A, *st.pos_s, P, m_a, 1 + d);
    r.checks.push_back(exponent_check("cond1", Int(0), e1, "single"));
    r.checks.push_back(exponent_check("cond2", w.exponent(Np, prev.a), m_a, "single"));
  }
  r.checks.push_back(
      exponent_check("cond3", m_a + 2 * P + w.exponent(0, Int(0)), w.exponent(N + 1, st.a), "single"));
  if (n == 0) {
    r.checks.push_back(not_applicable("cond4"));
  } else {
    const StageParams& prev = model.stage(n - 1);
    r.checks.push_back(exponent_check("cond4", *prev.log2_D + w.exponent(prev.level, *st.b), m_a, "single"));
  }
  ConditionCheck alpha;
  alpha.id = "alpha_a_n";
  alpha.lhs = "1";
  const Scalar a_last = model.alpha(Rank(A - 1));
  alpha.rhs = a_last.str();
  alpha.range = "single";
  alpha.status = Scalar(1) <= a_last ? CheckStatus::holds : CheckStatus::fails;
  r.checks.push_back(alpha);
  return r;
}

Int threshold_2bn(const WeightTable& w, unsigned N, const Int& req, const Int& lower, std::uint64_t max_scan) {
  const auto kstar = certificate_start(w, N, req);
  if (!kstar) throw SearchBudgetExhausted("2bn: the weight target has no closed form to certify the tail");
  if (lower >= *kstar) return lower;
  if (Int(*kstar - lower) > Int(static_cast<unsigned long>(max_scan))) {
    throw SearchBudgetExhausted("2bn: certificate starts at " + kstar->get_str() + ", more than " +
                                std::to_string(max_scan) + " candidates above " + lower.get_str());
  }
  for (Int k = *kstar; k >= lower; --k) {
    if (gap(w, N, k) < req) return k + 1;
  }
  return lower;
}

ConditionReport extend_stage(OperatorModel& model, const SearchBudget& budget, const Progress& progress) {
  auto say = [&](const std::string& s) {
    if (progress) progress(s);
  };
  const std::size_t n = model.stage_count();
  const WeightTable& w = model.weights();
  const unsigned N = nn_level(n);
  const Int max_scan(static_cast<unsigned long>(budget.max_scan));

  if (n == 0) {
    // alpha_{A_0 - 1} = 2^{A_0 - 2} / A_{N_0,a_0} >= 1 and cond3 with P_0 = 1.
    for (Int a = 2; a < max_scan; ++a) {
      const Int m = w.exponent(N, a);
      if (a - 2 >= m && m + 2 + w.exponent(0, Int(0)) <= w.exponent(N + 1, a)) {
        say("stage 0: a_0 = " + a.get_str());
        model.push_stage({a, std::nullopt, std::nullopt});
        return evaluate_conditions(model, 0, budget.conditions);
      }
    }
    throw SearchBudgetExhausted("stage 0: no a_0 within budget");
  }

  const StageParams& prev = model.stage(n - 1);
  if (!prev.log2_D) throw std::logic_error("D_" + std::to_string(n - 1) + " must be committed before stage " +
                                           std::to_string(n));
  const Int d = *prev.log2_D;
  const Int P = prev.pos_delta_next;
  const Int req = 2 * P + d;
  const Int lower = std::max(model.next_b_lower_bound(), Int(prev.delta_next + 1));
  say("stage " + std::to_string(n) + ": searching b from " + lower.get_str() + " (need gap >= " + req.get_str() + ")");
  const Int b = threshold_2bn(w, prev.level, req, lower, budget.max_scan);
  const Int s = 2 * b + 2;
  say("stage " + std::to_string(n) + ": b = " + b.get_str() + ", s = " + s.get_str());

  StageGeometry g = model.geometry();
  g.append(b);
  g.set_next_lower_bound(std::nullopt);
  const Int S = g.pos_column0(s);
  const Int m_prev = w.exponent(prev.level, prev.a);
  const Int m_b = w.exponent(prev.level, b);
  auto monotone_ok = [&](const Int& a) {
    const Int m = w.exponent(N, a);
    return cond1_exponent(g.pos_column0(a), S, P, m, 1 + d) >= 0 && m_prev <= m && d + m_b <= m;
  };
  auto cond3_ok = [&](const Int& a) {
    return w.exponent(N, a) + 2 * P + w.exponent(0, Int(0)) <= w.exponent(N + 1, a);
  };

  // Doubling then bisection for the monotone conditions.
  Int step = 1;
  while (!monotone_ok(s + step)) {
    step *= 2;
    if (step > max_scan * max_scan) throw SearchBudgetExhausted("stage " + std::to_string(n) + ": a search diverged");
  }
  Int lo = s + step / 2;  // fails (or equals s)
  Int hi = s + step;      // holds
  if (step == 1) lo = s;
  while (hi - lo > 1) {
    const Int mid = (lo + hi) / 2;
    (monotone_ok(mid) ? hi : lo) = mid;
  }
  say("stage " + std::to_string(n) + ": monotone conditions from a = " + hi.get_str());
  Int a = hi;
  for (Int tried = 0; !cond3_ok(a); ++a, ++tried) {
    if (tried > max_scan) throw SearchBudgetExhausted("stage " + std::to_string(n) + ": cond3 not met within budget");
  }
  say("stage " + std::to_string(n) + ": a = " + a.get_str());
  model.push_stage({a, b, s});
  ConditionReport report = evaluate_conditions(model, n, budget.conditions);
  if (model.mode() == Mode::strict && !report.all_hold()) {
    for (const auto& c : report.checks) {
      if (c.applicable && c.status != CheckStatus::holds) {
        throw SearchBudgetExhausted("stage " + std::to_string(n) + ": condition " + c.id + " is " +
                                    status_name(c.status) + " after the search");
      }
    }
  }
  return report;
}

HeadSpace head_space(std::size_t n, const OperatorModel& model) {
  const StageParams& st = model.stage(n);
  return {n, st.pos_delta_next, st.pos_a};
}

RankMap tau(std::size_t n, const RankMap& x, const OperatorModel& model) {
  const StageParams& st = model.stage(n);
  RankMap out;
  for (const auto& [j, v] : x) {
    if (j >= st.pos_delta_next) {
      throw NotInHead("rank " + j.get_str() + " is outside H_" + std::to_string(n));
    }
    if (j < st.pos_a) {
      accumulate(out, j, v);
      continue;
    }
    const Scalar c = -(v / st.eps);
    for (const auto& [k, u] : model.power_e0(Rank(j - st.pos_a))) accumulate(out, k, c * u);
  }
  return out;
}

SparseVector tau(std::size_t n, const SparseVector& x, const OperatorModel& model) {
  return model.to_coord_form(tau(n, model.to_rank_form(x), model));
}

SparseVector pi(std::size_t n, const SparseVector& x, const OperatorModel& model) {
  const Rank cut = model.stage(n).pos_delta_next;
  SparseVector out;
  for (const auto& [c, v] : x.entries()) {
    try {
      if (model.geometry().coord_to_rank(c) < cut) out.add(c, v);
    } catch (const HorizonExceeded&) {
      // Coordinates past the known path lie beyond every constructed cut.
    }
  }
  return out;
}

Int ceil_of(const Scalar& s) {
  const mpq_class q = s.to_mpq();
  Int r;
  mpz_cdiv_q(r.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return r;
}

Int k_membership(std::size_t n, const RankMap& y, const OperatorModel& model) {
  const Scalar norm = graded_seminorm(y, 0, model);
  const Scalar head = graded_seminorm(tau(n, y, model), 0, model);
  if (head.is_zero()) throw NotQualifying("tau_" + std::to_string(n) + "(y) = 0");
  const Int m = std::max(Int(1), ceil_of(norm));
  if (Scalar(m) <= Scalar(2) * head) return m;
  throw NotQualifying("|||y|||_0 = " + norm.str() + " needs scale " + m.get_str() + " but |||tau y|||_0 = " +
                      head.str());
}

}  // namespace isp
