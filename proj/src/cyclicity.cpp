#include "isp/cyclicity.hpp"

#include <random>

#include "isp/simplex.hpp"

namespace isp {

namespace {

Scalar l1_mass(const RankMap& c) {
  Scalar total;
  for (const auto& [i, v] : c) total += abs(v);
  return total;
}

RankMap to_ranks_checked(std::size_t n, const RankMap& y, const OperatorModel& model) {
  const Rank cut = model.stage(n).pos_delta_next;
  for (const auto& [j, v] : y) {
    if (j >= cut) throw NotInHead("rank " + j.get_str() + " is outside H_" + std::to_string(n));
  }
  return y;
}

}  // namespace

RankMap division_polynomial(std::size_t n, const RankMap& gamma, const OperatorModel& model) {
  const StageParams& st = model.stage(n);
  if (gamma.empty()) throw NotQualifying("zero vector has no polynomial");
  const Rank j0 = gamma.begin()->first;
  if (j0 >= st.pos_a) {
    throw NotQualifying("lowest gamma index " + j0.get_str() + " is not below A_" + std::to_string(n));
  }
  const std::size_t d = st.pos_delta.get_ui();
  std::vector<Scalar> u(d);
  for (const auto& [k, v] : gamma) {
    const Rank off = k - j0;
    if (off >= static_cast<unsigned long>(d)) break;
    u[off.get_ui()] = v;
  }
  // Power series inverse of u modulo t^d.
  std::vector<Scalar> v(d);
  const Scalar inv0 = u[0].reciprocal();
  for (std::size_t k = 0; k < d; ++k) {
    Scalar acc = k == 0 ? Scalar(1) : Scalar(0);
    for (std::size_t i = 1; i <= k; ++i) {
      if (!u[i].is_zero() && !v[k - i].is_zero()) acc -= u[i] * v[k - i];
    }
    v[k] = acc * inv0;
  }
  RankMap c;
  const Rank base = st.pos_a - j0;
  for (std::size_t k = 0; k < d; ++k) accumulate(c, Rank(base + static_cast<unsigned long>(k)), v[k]);
  return c;
}

std::optional<RankMap> lp_polynomial(std::size_t n, const RankMap& gamma, const OperatorModel& model,
                                     std::size_t column_cap) {
  const StageParams& st = model.stage(n);
  if (!st.pos_delta_next.fits_ulong_p()) return std::nullopt;
  const std::size_t top = st.pos_delta_next.get_ui();  // degrees 1..top, low window 0..top-1
  const std::size_t columns = 4 * top + 1;
  if (columns > column_cap) return std::nullopt;
  auto cplus = [](std::size_t i) { return 2 * (i - 1); };
  auto cminus = [](std::size_t i) { return 2 * (i - 1) + 1; };
  auto rplus = [top](std::size_t m) { return 2 * top + 2 * m; };
  auto rminus = [top](std::size_t m) { return 2 * top + 2 * m + 1; };
  const std::size_t slack = 4 * top;

  LinearProgram lp;
  lp.columns = columns;
  lp.cost.assign(columns, Scalar(0));
  for (std::size_t i = 1; i <= top; ++i) lp.cost[cplus(i)] = lp.cost[cminus(i)] = Scalar(1);
  const std::size_t c = st.pos_a.get_ui();
  for (std::size_t m = 0; m < top; ++m) {
    std::vector<std::pair<std::size_t, Scalar>> row;
    for (const auto& [k, g] : gamma) {
      if (k >= static_cast<unsigned long>(m)) break;
      const std::size_t i = m - k.get_ui();
      row.emplace_back(cplus(i), g);
      row.emplace_back(cminus(i), -g);
    }
    row.emplace_back(rplus(m), Scalar(-1));
    row.emplace_back(rminus(m), Scalar(1));
    lp.add_row(std::move(row), m == c ? Scalar(1) : Scalar(0));
  }
  std::vector<std::pair<std::size_t, Scalar>> budget;
  for (std::size_t m = 0; m < top; ++m) {
    const Scalar w = graded_seminorm(model.power_e0(Rank(static_cast<unsigned long>(m))), st.level, model);
    budget.emplace_back(rplus(m), w);
    budget.emplace_back(rminus(m), w);
  }
  budget.emplace_back(slack, Scalar(1));
  lp.add_row(std::move(budget), Scalar(1));

  const LpResult res = solve_lp(lp);
  if (res.status != LpResult::Status::optimal) return std::nullopt;
  RankMap coeffs;
  for (std::size_t i = 1; i <= top; ++i) {
    accumulate(coeffs, Rank(static_cast<unsigned long>(i)), res.x[cplus(i)] - res.x[cminus(i)]);
  }
  return coeffs;
}

PolynomialCertificate solve_polynomial(std::size_t n, const RankMap& y, const OperatorModel& model,
                                       const PolynomialOptions& opt) {
  const StageParams& st = model.stage(n);
  const RankMap gamma = model.gamma_from_ranks(to_ranks_checked(n, y, model));
  PolynomialCertificate cert;
  cert.n = n;
  cert.level = st.level;
  cert.coeffs = division_polynomial(n, gamma, model);
  cert.mass = l1_mass(cert.coeffs);
  cert.method = "division";
  if (opt.force_lp || cert.mass > opt.mass_cap) {
    if (auto lp = lp_polynomial(n, gamma, model, opt.lp_column_cap)) {
      const Scalar lp_mass = l1_mass(*lp);
      if (opt.force_lp || lp_mass < cert.mass) {
        cert.coeffs = std::move(*lp);
        cert.mass = lp_mass;
        cert.method = "lp";
      }
    } else {
      cert.warning = "LP fallback skipped (over " + std::to_string(opt.lp_column_cap) + " columns); kept division";
    }
  }
  return cert;
}

Scalar polynomial_residual(const RankMap& coeffs, const RankMap& y, unsigned N, const OperatorModel& model) {
  RankMap image = model.ranks_from_gamma(convolve(coeffs, model.gamma_from_ranks(y)));
  accumulate(image, Rank(0), Scalar(-1));
  return graded_seminorm(image, N, model);
}

PolynomialCertificate find_polynomial(std::size_t n, const RankMap& y, const OperatorModel& model,
                                      const PolynomialOptions& opt) {
  k_membership(n, y, model);
  PolynomialCertificate cert = solve_polynomial(n, y, model, opt);
  cert.residual = polynomial_residual(cert.coeffs, y, cert.level, model);
  if (*cert.residual > Scalar(3)) {
    throw ResidualTooLarge("stage " + std::to_string(n) + ": |||P(T)y - e_0|||_" + std::to_string(cert.level) +
                           " = " + cert.residual->str() + " > 3");
  }
  return cert;
}

std::vector<RankMap> sample_K(std::size_t n, const OperatorModel& model, std::uint64_t seed, std::size_t count) {
  const StageParams& st = model.stage(n);
  const std::uint64_t dim = st.pos_delta_next.get_ui();
  const std::uint64_t split = st.pos_a.get_ui();
  std::mt19937_64 rng(seed);
  auto small = [&] {
    const long num = static_cast<long>(rng() % 15) + 1;
    const long den = static_cast<long>(rng() % 7) + 1;
    return Scalar::fraction(rng() % 2 ? num : -num, den);
  };
  std::vector<RankMap> out;
  std::size_t attempts = 0;
  while (out.size() < count) {
    if (++attempts > 50 * count + 100) throw SampleFailure("K_" + std::to_string(n) + " sampler keeps rejecting");
    RankMap y;
    switch (attempts % 3) {
      case 0:  // scaled basis vector
        y.emplace(Rank(static_cast<unsigned long>(rng() % dim)), small());
        break;
      case 1: {  // two-term gamma mixture
        RankMap g;
        accumulate(g, Rank(static_cast<unsigned long>(rng() % dim)), small());
        accumulate(g, Rank(static_cast<unsigned long>(rng() % dim)), small());
        y = model.ranks_from_gamma(g);
        break;
      }
      default: {  // echo rank against its pure partner, nearly cancelling
        const std::uint64_t j = split + rng() % (dim - split);
        const long t = static_cast<long>(rng() % 20) + 1;
        RankMap g;
        accumulate(g, Rank(static_cast<unsigned long>(j)), Scalar(1));
        accumulate(g, Rank(static_cast<unsigned long>(j - split)), Scalar::pow2(-t) - Scalar(1));
        y = model.ranks_from_gamma(g);
        break;
      }
    }
    if (y.empty()) continue;
    const Scalar norm = graded_seminorm(y, 0, model);
    for (auto& [k, v] : y) v /= norm;
    if (Scalar(2) * graded_seminorm(tau(n, y, model), 0, model) >= Scalar(1)) out.push_back(std::move(y));
  }
  return out;
}

RankMap random_rank_vector(const Rank& bound, std::mt19937_64& rng) {
  RankMap x;
  while (x.empty()) {
    for (Rank j = 0; j < bound; ++j) {
      if (rng() % 2) accumulate(x, j, Scalar::fraction(static_cast<long>(rng() % 41) - 20, 1 + rng() % 9));
    }
  }
  return x;
}

DEstimate estimate_D(std::size_t n, const OperatorModel& model, const SamplerConfig& cfg) {
  DEstimate est;
  est.seed = cfg.seed;
  est.max_mass = Scalar(1);
  const bool next_stage = n + 1 < model.stage_count();
  for (const RankMap& y : sample_K(n, model, cfg.seed, cfg.count)) {
    const PolynomialCertificate cert = solve_polynomial(n, y, model, cfg.polynomial);
    if (next_stage) {
      const Scalar r = polynomial_residual(cert.coeffs, y, cert.level, model);
      if (r > Scalar(3)) throw SampleFailure("stage " + std::to_string(n) + ": sampled residual " + r.str() + " > 3");
    }
    if (cert.mass > est.max_mass) est.max_mass = cert.mass;
    ++est.samples;
  }
  // Smallest e with 2^e >= max_mass.
  Int e = est.max_mass.log2_estimate() - 1;
  if (e < 0) e = 0;
  while (Scalar::pow2(e) < est.max_mass) ++e;
  est.log2_D = e;
  return est;
}

namespace {

std::vector<std::size_t> stages_with_level(unsigned N, const OperatorModel& model) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < model.stage_count(); ++n) {
    if (model.stage(n).level == N) out.push_back(n);
  }
  return out;
}

std::string unresolved_message(unsigned N, const OperatorModel& model) {
  std::uint64_t next = first_stage_with_level(N);
  while (next < model.stage_count()) {
    ++next;
    while (nn_level(next) != N) ++next;
  }
  return "requires stage n with N_n=" + std::to_string(N) + " (first candidate n=" + std::to_string(next) + ")";
}

}  // namespace

HeadChoice head_qualify(const SparseVector& x, unsigned N, const OperatorModel& model) {
  if (x.empty()) throw ZeroVector("x = 0");
  for (std::size_t n : stages_with_level(N, model)) {
    const SparseVector head = pi(n, x, model);
    if (head.empty()) continue;
    try {
      return {n, k_membership(n, model.to_rank_form(head), model)};
    } catch (const NotQualifying&) {
    }
  }
  throw Unresolved(unresolved_message(N, model));
}

TailReport tail_bound_check(const SparseVector& x_tail, std::size_t n, const OperatorModel& model,
                            const std::vector<Rank>& powers) {
  const StageParams& st = model.stage(n);
  const unsigned N = st.level;
  const Scalar invD = st.D().reciprocal();
  const RankMap x = model.to_rank_form(x_tail);
  for (const auto& [j, v] : x) {
    if (j < st.pos_delta_next) throw NotInTail("rank " + j.get_str() + " lies in H_" + std::to_string(n));
  }
  for (const Rank& i : powers) {
    if (i < 1 || i > st.pos_delta_next) throw std::invalid_argument("power " + i.get_str() + " out of [1, P_{n+1}]");
  }
  TailReport rep;
  for (const auto& [j, v] : x) {
    const RankMap gj = model.gamma_from_ranks({{j, Scalar(1)}});
    const Scalar rhs = invD * product_seminorm(RankMap{{j, Scalar(1)}}, N + 2, model);
    for (const Rank& i : powers) {
      const Scalar lhs = product_seminorm(model.ranks_from_gamma(shift_ranks(gj, i)), N, model);
      rep.basis.push_back({i, j, lhs, rhs, lhs <= rhs});
      rep.holds = rep.holds && lhs <= rhs;
    }
  }
  const Scalar rhs = invD * product_seminorm(x, N + 2, model);
  const RankMap gx = model.gamma_from_ranks(x);
  for (const Rank& i : powers) {
    const Scalar lhs = product_seminorm(model.ranks_from_gamma(shift_ranks(gx, i)), N, model);
    if (rep.aggregate_lhs <= lhs) rep.aggregate_lhs = lhs;
    rep.holds = rep.holds && lhs <= rhs;
  }
  rep.aggregate_rhs = rhs;
  return rep;
}

CyclicityReport cyclic_certificate(const SparseVector& x, unsigned N, const OperatorModel& model,
                                   const PolynomialOptions& opt) {
  if (x.empty()) throw ZeroVector("x = 0");
  CyclicityReport rep;
  rep.input = x;
  rep.N = N;
  rep.k0 = x.entries().begin()->first.j;
  const Scalar col_norm = column_seminorm(x.column(rep.k0), 0, model.weights());
  rep.scaling = Scalar(2) / col_norm;
  const SparseVector xs = rep.scaling * x;

  bool found = false;
  for (std::size_t n : stages_with_level(N, model)) {
    const SparseVector head = pi(n, xs, model);
    if (head.empty()) continue;
    const RankMap y = model.to_rank_form(head);
    Int m;
    try {
      m = k_membership(n, y, model);
    } catch (const NotQualifying&) {
      continue;
    }
    const Scalar tail = product_seminorm(xs - head, N + 2, model.weights());
    if (tail > Scalar(1)) continue;
    PolynomialCertificate cert;
    try {
      cert = find_polynomial(n, y, model, opt);
    } catch (const HorizonExceeded& e) {
      throw Unresolved("stage " + std::to_string(n) + " head residual needs stage " + std::to_string(n + 1) + ": " +
                       e.what());
    }
    rep.stage = n;
    rep.head_scale = m;
    rep.tail_norm = tail;
    // Coefficients found for pi(xs) carry over to x through the scaling.
    for (auto& [i, c] : cert.coeffs) c *= rep.scaling;
    cert.mass = l1_mass(cert.coeffs);
    rep.certificate = std::move(cert);
    found = true;
    break;
  }
  if (!found) throw Unresolved(unresolved_message(N, model));

  RankMap image;
  try {
    image = model.to_rank_form(apply_polynomial(rep.certificate.coeffs, x, model));
  } catch (const HorizonExceeded& e) {
    throw Unresolved(std::string("P(T)x leaves the constructed stages: ") + e.what());
  }
  accumulate(image, Rank(0), Scalar(-1));
  rep.final_norm = product_seminorm(image, N, model);
  if (rep.final_norm > Scalar(4)) {
    throw BoundViolated("||P(T)x - e_0||_" + std::to_string(N) + " = " + rep.final_norm.str() + " > 4");
  }
  return rep;
}

}  // namespace isp
