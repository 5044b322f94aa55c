#pragma once

// Exact rational scalars with a power-of-two fast path.
//
// A Scalar stores its value as (num / den) * 2^exp where num and den are odd
// (or num == 0), gcd(num, den) == 1 and den > 0.  Pulling the 2-adic part into
// an arbitrary-precision exponent keeps products of weights like 2^-6000000
// cheap: only additions of terms with very different exponents ever have to
// materialize the full binary expansion.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace isp {

using Int = mpz_class;

/// Thrown when a value would have to be expanded into more bits than allowed.
class MagnitudeError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

class Scalar {
 public:
  Scalar() : num_(0), den_(1), exp_(0) {}
  Scalar(long v);  // NOLINT(google-explicit-constructor)
  Scalar(int v) : Scalar(static_cast<long>(v)) {}  // NOLINT
  explicit Scalar(const Int& v);
  explicit Scalar(const mpq_class& v);

  static Scalar fraction(const Int& num, const Int& den);
  static Scalar pow2(const Int& e);
  static Scalar pow2(long e) { return pow2(Int(e)); }
  /// num/den * 2^e, normalised.
  static Scalar scaled(const Int& num, const Int& den, const Int& e);

  bool is_zero() const { return num_ == 0; }
  int sign() const { return sgn(num_); }
  /// True when the value is +-2^e.
  bool is_dyadic() const { return !is_zero() && den_ == 1 && ::abs(num_) == 1; }
  /// The binary exponent e in (num/den)*2^e.
  const Int& exponent() const { return exp_; }
  const Int& odd_numerator() const { return num_; }
  const Int& odd_denominator() const { return den_; }

  /// Lowest-terms numerator/denominator; expands the exponent.
  Int numerator() const;
  Int denominator() const;
  mpq_class to_mpq() const;
  /// floor(log2|v|) lies in [log2_estimate() - 1, log2_estimate()].
  Int log2_estimate() const;

  Scalar operator-() const;
  Scalar abs() const;
  Scalar reciprocal() const;

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);
  Scalar& operator*=(const Scalar& o);
  Scalar& operator/=(const Scalar& o);

  friend Scalar operator+(Scalar a, const Scalar& b) { return a += b; }
  friend Scalar operator-(Scalar a, const Scalar& b) { return a -= b; }
  friend Scalar operator*(Scalar a, const Scalar& b) { return a *= b; }
  friend Scalar operator/(Scalar a, const Scalar& b) { return a /= b; }

  friend bool operator==(const Scalar& a, const Scalar& b) {
    return a.num_ == b.num_ && a.den_ == b.den_ && a.exp_ == b.exp_;
  }
  friend std::strong_ordering operator<=>(const Scalar& a, const Scalar& b);

  /// Canonical text: "0", "n", "n/d", "2^e", "-2^e", "n*2^e", "n/d*2^e".
  std::string str() const;
  static Scalar parse(std::string_view text);

  /// Largest shift ever materialised by additions/comparisons (bits).
  static constexpr unsigned long kMaxShift = 1ul << 34;

 private:
  void normalize();
  static int compare_magnitude(const Scalar& a, const Scalar& b);

  Int num_;
  Int den_;
  Int exp_;
};

std::ostream& operator<<(std::ostream& os, const Scalar& s);

inline Scalar abs(const Scalar& s) { return s.abs(); }

}  // namespace isp
