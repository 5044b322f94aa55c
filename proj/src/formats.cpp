#include "isp/formats.hpp"

#include <sstream>

namespace isp {

namespace {

// Splits off the magic line; the rest is the body.
std::string body_after(const std::string& text, const char* magic) {
  const auto nl = text.find('\n');
  const std::string first = text.substr(0, nl);
  if (first != magic) throw ParseError("expected '" + std::string(magic) + "', got '" + first + "'");
  return nl == std::string::npos ? std::string() : text.substr(nl + 1);
}

RankMap parse_entries(const std::string& body) {
  try {
    return parse_rank_map(body);
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

}  // namespace

std::string vector_text(const RankMap& x) { return std::string(kVectorMagic) + "\nform ranks\n" + rank_map_str(x); }

std::string vector_text(const SparseVector& x) { return std::string(kVectorMagic) + "\nform coords\n" + x.str(); }

SparseVector parse_vector(const std::string& text, const OperatorModel& model) {
  const std::string body = body_after(text, kVectorMagic);
  const auto nl = body.find('\n');
  const std::string form = body.substr(0, nl);
  const std::string rest = nl == std::string::npos ? std::string() : body.substr(nl + 1);
  if (form == "form ranks") return model.to_coord_form(parse_entries(rest));
  if (form == "form coords") {
    try {
      return SparseVector::parse(rest);
    } catch (const std::invalid_argument& e) {
      throw ParseError(e.what());
    }
  }
  throw ParseError("expected 'form ranks' or 'form coords', got '" + form + "'");
}

std::string gamma_text(const RankMap& y) { return std::string(kGammaMagic) + "\n" + rank_map_str(y); }

RankMap parse_gamma(const std::string& text) { return parse_entries(body_after(text, kGammaMagic)); }

std::string polynomial_text(const RankMap& coeffs) { return std::string(kPolynomialMagic) + "\n" + rank_map_str(coeffs); }

RankMap parse_polynomial(const std::string& text) {
  RankMap c = parse_entries(body_after(text, kPolynomialMagic));
  if (c.count(Rank(0))) throw ParseError("polynomial has a constant term");
  return c;
}

std::string certificate_text(const CyclicityReport& rep, const std::string& params_hash) {
  const PolynomialCertificate& c = rep.certificate;
  std::ostringstream out;
  out << kCertificateMagic << '\n';
  out << "params-sha256 " << (params_hash.empty() ? "-" : params_hash) << '\n';
  out << "N " << rep.N << '\n';
  out << "k0 " << rep.k0 << '\n';
  out << "scaling " << rep.scaling.str() << '\n';
  out << "stage " << rep.stage << '\n';
  out << "head_scale " << rep.head_scale.get_str() << '\n';
  out << "method " << c.method << '\n';
  out << "mass " << c.mass.str() << '\n';
  out << "head_residual " << (c.residual ? c.residual->str() : "-") << '\n';
  out << "tail_norm " << rep.tail_norm.str() << '\n';
  out << "final_norm " << rep.final_norm.str() << '\n';
  out << "bound 4\n";
  out << "verdict " << (rep.final_norm <= Scalar(4) ? "PASS" : "FAIL") << '\n';
  if (!c.warning.empty()) out << "warning " << c.warning << '\n';
  out << "input\n" << rep.input.str();
  out << "polynomial\n" << rank_map_str(c.coeffs);
  out << "end\n";
  return out.str();
}

}  // namespace isp
