// Acceptance run: one PASS/FAIL line per criterion AC1-AC13.
// Comparisons are exact; the only tolerances are the wall-clock budgets printed
// on each line.  Exit status 0 iff every line is PASS.

#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "isp/params.hpp"
#include "isp/verify.hpp"

namespace {

using namespace isp;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

bool run(const std::string& id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
  const bool in_time = budget_s <= 0 || secs <= budget_s;
  const bool pass = o.pass && in_time;
  std::ostringstream line;
  line.setf(std::ios::fixed);
  line.precision(2);
  line << id << ' ' << (pass ? "PASS" : "FAIL") << "  " << o.detail << "  [tolerance exact; " << secs << " s";
  if (budget_s > 0) line << " <= " << budget_s << " s";
  line << ']';
  std::cout << line.str() << std::endl;
  return pass;
}

std::string count_str(std::size_t passed, std::size_t total) {
  return std::to_string(passed) + "/" + std::to_string(total);
}

// Suites that must all report PASS on the given model.
Outcome suites_pass(const std::vector<std::string>& ids, const OperatorModel& m, const VerifyRanges& r) {
  Outcome o;
  for (const auto& id : ids) {
    const SuiteReport rep = run_verification_suite(id, m, r);
    if (!o.detail.empty()) o.detail += ", ";
    o.detail += id + " " + rep.verdict() + " " + count_str(rep.passed(), rep.count());
    o.pass = o.pass && rep.verdict() == "PASS";
  }
  return o;
}

Outcome ordering_oracle() {
  const BParams b{{Int(6), Int(30), Int(100)}, std::nullopt};
  const StageGeometry g(b);
  const std::size_t last = 200000;
  std::set<Coord> seen;
  Coord c{Int(0), 0};
  std::size_t bad = 0;
  for (std::size_t k = 0; k <= last; ++k) {
    const Rank r(static_cast<unsigned long>(k));
    if (!(g.rank_to_coord(r) == c) || g.coord_to_rank(c) != r) ++bad;
    seen.insert(c);
    c = next(c, b);
  }
  const bool distinct = seen.size() == last + 1;
  return {bad == 0 && distinct, "b=(6,30,100) ranks 0.." + std::to_string(last) + ": " + std::to_string(bad) +
                                    " mismatches, " + (distinct ? "all distinct" : "repeated coords")};
}

Outcome ordering_fixtures() {
  const BParams b{{Int(6), Int(30)}, std::nullopt};
  const StageGeometry g(b);
  const std::vector<std::pair<Coord, long>> want = {
      {{Int(7), 0}, 33}, {{Int(30), 0}, 56}, {{Int(0), 1}, 13}, {{Int(0), 2}, 14}};
  const auto path = path_prefix(60, b);
  Outcome o;
  for (const auto& [c, k] : want) {
    const bool ok = g.coord_to_rank(c) == k && path[static_cast<std::size_t>(k)] == c;
    o.pass = o.pass && ok;
    o.detail += "pos" + c.str() + "=" + g.coord_to_rank(c).get_str() + (ok ? " " : "(want " + std::to_string(k) + ") ");
  }
  o.detail += "with b=(6,30)";
  return o;
}

Outcome position_identity(const OperatorModel& strict, const OperatorModel& toy) {
  Outcome o;
  for (const OperatorModel* m : {&strict, &toy}) {
    std::size_t held = 0;
    for (const auto& st : m->stages()) {
      const Rank from_geometry = m->geometry().pos_column0(st.delta_next);
      if (st.pos_delta_next == Rank(st.pos_a + st.pos_delta) && from_geometry == st.pos_delta_next) ++held;
    }
    o.pass = o.pass && held == m->stage_count();
    o.detail += std::string(mode_name(m->mode())) + " " + count_str(held, m->stage_count()) + " stages; ";
  }
  o.detail += "P_{n+1} = A_n + P_n";
  return o;
}

Outcome closed_form(const OperatorModel& strict, const OperatorModel& toy) {
  Outcome o;
  const Rank strict_last = std::min(strict.stage(1).pos_delta_next, Rank(5000));
  const Rank toy_last = toy.stage(2).pos_delta_next;
  for (const auto& [m, last] : {std::pair{&strict, strict_last}, std::pair{&toy, toy_last}}) {
    SparseVector x = SparseVector::unit({Int(0), 0});
    std::size_t bad = 0;
    for (Rank j = 0; j <= last; ++j) {
      if (!(x == t_power_e0(j, *m))) ++bad;
      if (j < last) x = apply_T(x, *m);
    }
    o.pass = o.pass && bad == 0;
    o.detail += std::string(mode_name(m->mode())) + " j<=" + last.get_str() + " mismatches " + std::to_string(bad) + "; ";
  }
  return o;
}

Outcome operator_table(const OperatorModel& strict, const OperatorModel& toy) {
  Outcome o;
  for (const OperatorModel* m : {&strict, &toy}) {
    const SuiteReport rep = run_verification_suite("prop7.1", *m);
    o.pass = o.pass && rep.verdict() == "PASS" && rep.census.size() == 5;
    o.detail += std::string(mode_name(m->mode())) + " " + count_str(rep.passed(), rep.count()) + " census{";
    std::string census;
    for (const auto& [k, v] : rep.census) census += (census.empty() ? "" : " ") + k + ":" + std::to_string(v);
    o.detail += census + "}; ";
  }
  return o;
}

Outcome read_lemma(const OperatorModel& m) {
  const Scalar D = m.stage(0).D();
  std::size_t ok = 0, total = 0;
  Scalar worst_mass, worst_res;
  for (const RankMap& y : sample_K(0, m, 20240611, 50)) {
    ++total;
    const PolynomialCertificate c = find_polynomial(0, y, m);
    Scalar mass;
    for (const auto& [k, v] : c.coeffs) mass = mass + abs(v);
    const Scalar res = polynomial_residual(c.coeffs, y, m.stage(0).level, m);
    if (mass > worst_mass) worst_mass = mass;
    if (res > worst_res) worst_res = res;
    if (mass <= D && res <= Scalar(3) && res == *c.residual) ++ok;
  }
  std::size_t agree = 0;
  PolynomialOptions lp;
  lp.force_lp = true;
  for (const RankMap& y : sample_K(0, m, 99, 20)) {
    const auto div = find_polynomial(0, y, m);
    const auto via_lp = find_polynomial(0, y, m, lp);
    if (via_lp.method == "lp" && via_lp.mass <= div.mass && *via_lp.residual <= Scalar(3) && *div.residual <= Scalar(3)) {
      ++agree;
    }
  }
  return {ok == 50 && agree == 20, "K_0 samples " + count_str(ok, total) + " (max mass " + worst_mass.str() + " <= D_0=" +
                                       D.str() + ", max residual " + worst_res.str() + " <= 3); LP cross-checks " +
                                       count_str(agree, 20)};
}

Outcome certificates(const OperatorModel& m) {
  std::mt19937_64 rng(7);
  std::size_t ok = 0;
  Scalar worst;
  for (int t = 0; t < 25; ++t) {
    const SparseVector x = m.to_coord_form(random_rank_vector(m.stage(0).pos_a, rng));
    const CyclicityReport rep = cyclic_certificate(x, 0, m);
    SparseVector img = apply_polynomial(rep.certificate.coeffs, x, m);
    img.add({Int(0), 0}, Scalar(-1));
    const Scalar norm = product_seminorm(img, 0, m.weights());
    if (norm > worst) worst = norm;
    if (norm == rep.final_norm && norm <= Scalar(4)) ++ok;
  }
  const CyclicityReport unit = cyclic_certificate(SparseVector::unit({Int(0), 0}), 0, m);
  const bool unit_ok = unit.final_norm == Scalar(1);
  return {ok == 25 && unit_ok, "random x " + count_str(ok, 25) + " (max final norm " + worst.str() +
                                   " <= 4); e_0 residual " + unit.final_norm.str()};
}

Outcome gamma_and_powers(const OperatorModel& m) {
  std::mt19937_64 rng(12);
  const Rank horizon = m.rank_horizon();
  auto random_vector = [&](const Rank& below) {
    RankMap x;
    while (x.empty()) {
      const int terms = 1 + static_cast<int>(rng() % 6);
      for (int k = 0; k < terms; ++k) {
        const Rank j = rng() % 3 == 0 ? Rank(static_cast<unsigned long>(rng() % 64))
                                      : Rank(static_cast<unsigned long>(rng() % below.get_ui()));
        accumulate(x, j, Scalar::fraction(static_cast<long>(rng() % 41) - 20, 1 + rng() % 9));
      }
    }
    return m.to_coord_form(x);
  };
  std::size_t round_trips = 0;
  for (int t = 0; t < 200; ++t) {
    const SparseVector x = random_vector(horizon);
    if (from_gamma(to_gamma(x, m), m) == x) ++round_trips;
  }
  std::size_t powers = 0;
  const Rank below(horizon - 51);
  for (int t = 0; t < 100; ++t) {
    const SparseVector x = random_vector(below);
    SparseVector y = x;
    bool same = true;
    for (unsigned long k = 1; k <= 50; ++k) {
      y = apply_T(y, m);
      same = same && apply_T_power(Rank(k), x, m) == y;
    }
    if (same) ++powers;
  }
  return {round_trips == 200 && powers == 100, "gamma round-trips " + count_str(round_trips, 200) +
                                                   "; T^k x = k-fold T x for k<=50 on " + count_str(powers, 100)};
}

Outcome persistence(const ParameterFile& pf) {
  const auto path = std::filesystem::temp_directory_path() / "isp_acceptance.params";
  save_params(path, pf);
  const std::string text = read_file(path);
  const ParameterFile back = load_params(path);
  std::filesystem::remove(path);
  const OperatorModel a = pf.build_model();
  const OperatorModel b = back.build_model();
  bool same = to_text(back) == text && a.stage_count() == b.stage_count();
  for (std::size_t n = 0; same && n < a.stage_count(); ++n) {
    const auto& x = a.stage(n);
    const auto& y = b.stage(n);
    same = x.a == y.a && x.b == y.b && x.s == y.s && x.delta == y.delta && x.delta_next == y.delta_next &&
           x.log2_D == y.log2_D && x.eps == y.eps && x.pos_delta == y.pos_delta && x.pos_a == y.pos_a &&
           x.pos_b == y.pos_b && x.pos_s == y.pos_s && x.pos_delta_next == y.pos_delta_next;
  }
  const std::string hash = sha256_hex(text);
  const VerifyRanges r;
  auto report = [&] {
    std::vector<SuiteReport> reps;
    for (const auto& id : suite_ids()) reps.push_back(run_verification_suite(id, b, r));
    return format_reports(reps, r, hash);
  };
  const std::string first = report();
  const std::string second = report();
  const bool identical = first == second;
  return {same && identical, std::string("reload ") + (same ? "bit-identical" : "differs") + "; verify all twice " +
                                 (identical ? "byte-identical" : "differs") + " (" + std::to_string(first.size()) +
                                 " bytes, params sha256 " + hash.substr(0, 16) + ")"};
}

}  // namespace

int main() {
  const ParameterFile strict_pf = builtin_params(Mode::strict);
  const ParameterFile toy_pf = builtin_params(Mode::toy);
  const OperatorModel strict = strict_pf.build_model();
  const OperatorModel toy = toy_pf.build_model();
  const VerifyRanges ranges;

  bool all = true;
  all &= run("AC1", 10, ordering_oracle);
  all &= run("AC2", 0, ordering_fixtures);
  all &= run("AC3", 0, [&] { return position_identity(strict, toy); });
  all &= run("AC4", 60, [&] { return suites_pass({"prop2.1"}, strict, ranges); });
  all &= run("AC5", 0, [&] { return closed_form(strict, toy); });
  all &= run("AC6", 0, [&] { return operator_table(strict, toy); });
  all &= run("AC7", 0, [&] { return suites_pass({"prop8.2", "lemma8.1"}, strict, ranges); });
  all &= run("AC8", 0, [&] { return suites_pass({"lemma9.1", "prop9.2"}, strict, ranges); });
  all &= run("AC9", 0, [&] { return suites_pass({"prop11.2"}, strict, ranges); });
  all &= run("AC10", 0, [&] { return read_lemma(strict); });
  all &= run("AC11", 60, [&] { return certificates(strict); });
  all &= run("AC12", 0, [&] { return gamma_and_powers(strict); });
  all &= run("AC13", 0, [&] { return persistence(strict_pf); });
  std::cout << (all ? "ALL PASS" : "SOME FAIL") << std::endl;
  return all ? 0 : 1;
}
