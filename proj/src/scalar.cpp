#include "isp/scalar.hpp"

#include <ostream>

namespace isp {
namespace {

unsigned long checked_shift(const Int& e) {
  if (e < 0 || e > Scalar::kMaxShift) {
    throw MagnitudeError("scalar expansion needs a shift of " + e.get_str() + " bits");
  }
  return e.get_ui();
}

Int shl(const Int& v, const Int& e) {
  Int r;
  mpz_mul_2exp(r.get_mpz_t(), v.get_mpz_t(), checked_shift(e));
  return r;
}

// Removes factors of two from v and returns how many were removed.
unsigned long strip_twos(Int& v) {
  if (v == 0) return 0;
  const unsigned long tz = mpz_scan1(v.get_mpz_t(), 0);
  if (tz > 0) mpz_tdiv_q_2exp(v.get_mpz_t(), v.get_mpz_t(), tz);
  return tz;
}

long bitlen(const Int& v) {
  return v == 0 ? 0 : static_cast<long>(mpz_sizeinbase(v.get_mpz_t(), 2));
}

}  // namespace

Scalar::Scalar(long v) : num_(v), den_(1), exp_(0) { normalize(); }

Scalar::Scalar(const Int& v) : num_(v), den_(1), exp_(0) { normalize(); }

Scalar::Scalar(const mpq_class& v) : num_(v.get_num()), den_(v.get_den()), exp_(0) {
  normalize();
}

Scalar Scalar::fraction(const Int& num, const Int& den) { return scaled(num, den, Int(0)); }

Scalar Scalar::pow2(const Int& e) {
  Scalar s;
  s.num_ = 1;
  s.exp_ = e;
  return s;
}

Scalar Scalar::scaled(const Int& num, const Int& den, const Int& e) {
  if (den == 0) throw std::domain_error("zero denominator");
  Scalar s;
  s.num_ = num;
  s.den_ = den;
  s.exp_ = e;
  s.normalize();
  return s;
}

void Scalar::normalize() {
  if (num_ == 0) {
    den_ = 1;
    exp_ = 0;
    return;
  }
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  const unsigned long tn = strip_twos(num_);
  const unsigned long td = strip_twos(den_);
  exp_ += tn;
  exp_ -= td;
  if (den_ != 1) {
    Int g;
    mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
    if (g != 1) {
      mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
      mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
    }
  }
}

Int Scalar::numerator() const { return exp_ > 0 ? shl(num_, exp_) : num_; }

Int Scalar::denominator() const { return exp_ < 0 ? shl(den_, -exp_) : den_; }

mpq_class Scalar::to_mpq() const {
  mpq_class q(numerator(), denominator());
  q.canonicalize();
  return q;
}

Int Scalar::log2_estimate() const {
  if (is_zero()) throw std::domain_error("log2 of zero");
  return exp_ + (bitlen(num_) - bitlen(den_));
}

Scalar Scalar::operator-() const {
  Scalar r = *this;
  r.num_ = -r.num_;
  return r;
}

Scalar Scalar::abs() const {
  Scalar r = *this;
  if (r.num_ < 0) r.num_ = -r.num_;
  return r;
}

Scalar Scalar::reciprocal() const {
  if (is_zero()) throw std::domain_error("reciprocal of zero");
  Scalar r;
  r.num_ = den_;
  r.den_ = num_;
  r.exp_ = -exp_;
  if (r.den_ < 0) {
    r.num_ = -r.num_;
    r.den_ = -r.den_;
  }
  return r;
}

Scalar& Scalar::operator+=(const Scalar& o) {
  if (o.is_zero()) return *this;
  if (is_zero()) return *this = o;
  // Align to the smaller exponent; both denominators stay odd.
  Int lhs, rhs;
  Int e;
  if (exp_ == o.exp_) {
    lhs = num_ * o.den_;
    rhs = o.num_ * den_;
    e = exp_;
  } else if (exp_ > o.exp_) {
    lhs = shl(num_ * o.den_, exp_ - o.exp_);
    rhs = o.num_ * den_;
    e = o.exp_;
  } else {
    lhs = num_ * o.den_;
    rhs = shl(o.num_ * den_, o.exp_ - exp_);
    e = exp_;
  }
  num_ = lhs + rhs;
  den_ *= o.den_;
  exp_ = std::move(e);
  normalize();
  return *this;
}

Scalar& Scalar::operator-=(const Scalar& o) { return *this += -o; }

Scalar& Scalar::operator*=(const Scalar& o) {
  if (is_zero()) return *this;
  if (o.is_zero()) return *this = Scalar();
  if (den_ == 1 && o.den_ == 1) {
    num_ *= o.num_;
  } else {
    // Cross-reduce; all factors are odd so no twos appear.
    Int g1, g2;
    mpz_gcd(g1.get_mpz_t(), num_.get_mpz_t(), o.den_.get_mpz_t());
    mpz_gcd(g2.get_mpz_t(), o.num_.get_mpz_t(), den_.get_mpz_t());
    num_ = (num_ / g1) * (o.num_ / g2);
    den_ = (den_ / g2) * (o.den_ / g1);
  }
  exp_ += o.exp_;
  return *this;
}

Scalar& Scalar::operator/=(const Scalar& o) { return *this *= o.reciprocal(); }

int Scalar::compare_magnitude(const Scalar& a, const Scalar& b) {
  // |v| lies in (2^(L-1), 2^(L+1)) with L = exp + bitlen(num) - bitlen(den).
  const Int la = a.log2_estimate();
  const Int lb = b.log2_estimate();
  if (la + 2 <= lb) return -1;
  if (lb + 2 <= la) return 1;
  Int lhs = ::abs(a.num_) * b.den_;
  Int rhs = ::abs(b.num_) * a.den_;
  if (a.exp_ > b.exp_) {
    lhs = shl(lhs, a.exp_ - b.exp_);
  } else if (b.exp_ > a.exp_) {
    rhs = shl(rhs, b.exp_ - a.exp_);
  }
  const int c = cmp(lhs, rhs);
  return (c > 0) - (c < 0);
}

std::strong_ordering operator<=>(const Scalar& a, const Scalar& b) {
  const int sa = a.sign();
  const int sb = b.sign();
  if (sa != sb) return sa <=> sb;
  if (sa == 0) return std::strong_ordering::equal;
  if (a == b) return std::strong_ordering::equal;
  int m = Scalar::compare_magnitude(a, b);
  if (sa < 0) m = -m;
  return m <=> 0;
}

std::string Scalar::str() const {
  if (is_zero()) return "0";
  if (is_dyadic()) {
    const std::string sign = num_ < 0 ? "-" : "";
    if (exp_ == 0) return sign + "1";
    return sign + "2^" + exp_.get_str();
  }
  std::string out = num_.get_str();
  if (den_ != 1) out += "/" + den_.get_str();
  if (exp_ != 0) out += "*2^" + exp_.get_str();
  return out;
}

namespace {

Int parse_int(std::string_view s, std::string_view whole) {
  std::string tmp(s);
  if (tmp.empty()) throw std::invalid_argument("malformed scalar: '" + std::string(whole) + "'");
  if (tmp[0] == '+') tmp.erase(0, 1);
  Int v;
  if (tmp.empty() || v.set_str(tmp, 10) != 0) {
    throw std::invalid_argument("malformed scalar: '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

Scalar Scalar::parse(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (s.empty()) throw std::invalid_argument("empty scalar");

  Int e(0);
  std::string_view frac = s;
  bool neg_pow = false;
  if (const auto caret = s.find('^'); caret != std::string_view::npos) {
    e = parse_int(s.substr(caret + 1), text);
    std::string_view head = s.substr(0, caret);
    // head is "2", "-2", "+2", or "<frac>*2"
    if (const auto star = head.find('*'); star != std::string_view::npos) {
      if (head.substr(star + 1) != "2") throw std::invalid_argument("malformed scalar: '" + std::string(text) + "'");
      frac = head.substr(0, star);
    } else if (head == "2" || head == "+2") {
      frac = "1";
    } else if (head == "-2") {
      frac = "1";
      neg_pow = true;
    } else {
      throw std::invalid_argument("malformed scalar: '" + std::string(text) + "'");
    }
  }
  Int num, den(1);
  if (const auto slash = frac.find('/'); slash != std::string_view::npos) {
    num = parse_int(frac.substr(0, slash), text);
    den = parse_int(frac.substr(slash + 1), text);
    if (den == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
  } else {
    num = parse_int(frac, text);
  }
  if (neg_pow) num = -num;
  return scaled(num, den, e);
}

std::ostream& operator<<(std::ostream& os, const Scalar& s) { return os << s.str(); }

}  // namespace isp
