#pragma once

// Versioned text files for vectors, gamma coefficients, polynomials and
// cyclicity certificates.  Every file starts with its magic line; entries are
// one per line, '#' starts a comment.

#include <string>

#include "isp/cyclicity.hpp"

namespace isp {

inline constexpr const char* kVectorMagic = "isp-vector v1";
inline constexpr const char* kGammaMagic = "isp-gamma v1";
inline constexpr const char* kPolynomialMagic = "isp-poly v1";
inline constexpr const char* kCertificateMagic = "isp-certificate v1";

/// "form ranks" followed by "rank value" lines.
std::string vector_text(const RankMap& x);
/// "form coords" followed by "(i,j) value" lines.
std::string vector_text(const SparseVector& x);
/// Accepts either form; rank entries are mapped through the model's ordering.
SparseVector parse_vector(const std::string& text, const OperatorModel& model);

std::string gamma_text(const RankMap& y);
RankMap parse_gamma(const std::string& text);

std::string polynomial_text(const RankMap& coeffs);
RankMap parse_polynomial(const std::string& text);

std::string certificate_text(const CyclicityReport& rep, const std::string& params_hash);

}  // namespace isp
