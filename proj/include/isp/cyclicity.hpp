#pragma once

// Polynomial certificates: for y in the head space H_n, a polynomial P with no
// constant term such that P(T)y is close to e_0, and the end-to-end check
// ||P(T)x - e_0||_N <= 4 for a single vector x.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isp/stages.hpp"

namespace isp {

struct PolynomialOptions {
  Scalar mass_cap = Scalar(16);         // division results above this try the LP
  std::size_t lp_column_cap = 2000;     // LP is skipped beyond this many columns
  bool force_lp = false;
};

struct PolynomialCertificate {
  std::size_t n = 0;
  unsigned level = 0;  // seminorm index N_n
  RankMap coeffs;      // degree -> coefficient, degrees >= 1
  Scalar mass;         // sum |c_i|
  std::optional<Scalar> residual;  // graded N_n seminorm of P(T)y - e_0, when stage n+1 exists
  std::string method;              // "division" or "lp"
  std::string warning;
};

/// Division in gamma-coordinates: t^{A_n - j0} / u(t) truncated to P_n terms.
RankMap division_polynomial(std::size_t n, const RankMap& gamma, const OperatorModel& model);
/// Minimal-mass polynomial with weighted low-window residual at most 1; empty if the LP is too large.
std::optional<RankMap> lp_polynomial(std::size_t n, const RankMap& gamma, const OperatorModel& model,
                                     std::size_t column_cap);

/// Coefficients only (needs stage n).
PolynomialCertificate solve_polynomial(std::size_t n, const RankMap& y, const OperatorModel& model,
                                       const PolynomialOptions& opt = {});
/// |||P(T)y - e_0|||_{N_n} (needs stage n+1 for the high window).
Scalar polynomial_residual(const RankMap& coeffs, const RankMap& y, unsigned N, const OperatorModel& model);
/// solve_polynomial plus the exact residual; throws ResidualTooLarge above 3.
PolynomialCertificate find_polynomial(std::size_t n, const RankMap& y, const OperatorModel& model,
                                      const PolynomialOptions& opt = {});

struct SamplerConfig {
  std::uint64_t seed = 20240611;
  std::size_t count = 64;
  PolynomialOptions polynomial;
};

struct DEstimate {
  Int log2_D;
  Scalar max_mass;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

/// Random members of K_n: |||y|||_0 = 1 and |||tau_n y|||_0 >= 1/2 (rank form).
std::vector<RankMap> sample_K(std::size_t n, const OperatorModel& model, std::uint64_t seed, std::size_t count);
/// Smallest power of two >= 1 bounding the sampled polynomial masses.
DEstimate estimate_D(std::size_t n, const OperatorModel& model, const SamplerConfig& cfg = {});

/// Non-zero rank-form vector below `bound`: each rank kept with probability 1/2,
/// coefficients n/d with |n| <= 20 and 1 <= d <= 9.
RankMap random_rank_vector(const Rank& bound, std::mt19937_64& rng);

struct HeadChoice {
  std::size_t n;
  Int scale;
};
/// First stage n with N_n = N whose head pi_n(x) lies in scale * K_n.
HeadChoice head_qualify(const SparseVector& x, unsigned N, const OperatorModel& model);

struct TailCheck {
  Rank i, j;
  Scalar lhs, rhs;  // ||T^i e_j||_{N_n} and ||e_j||_{N_n+2} / D_n
  bool holds;
};
struct TailReport {
  std::vector<TailCheck> basis;
  Scalar aggregate_lhs, aggregate_rhs;  // for the whole vector with the largest sampled i
  bool holds = true;
};
/// Tail estimate ||T^i x||_{N_n} <= ||x||_{N_n+2} / D_n for the sampled powers i.
TailReport tail_bound_check(const SparseVector& x_tail, std::size_t n, const OperatorModel& model,
                            const std::vector<Rank>& powers);

struct CyclicityReport {
  SparseVector input;
  std::uint64_t k0 = 0;  // first column with non-zero |.|_0 norm
  Scalar scaling;        // x was multiplied by this before the head search
  unsigned N = 0;
  std::size_t stage = 0;
  Int head_scale;
  PolynomialCertificate certificate;  // coefficients for the original x
  Scalar tail_norm;                   // ||x' - pi x'||_{N+2} for the scaled x'
  Scalar final_norm;                  // ||P(T)x - e_0||_N
};

CyclicityReport cyclic_certificate(const SparseVector& x, unsigned N, const OperatorModel& model,
                                   const PolynomialOptions& opt = {});

}  // namespace isp
