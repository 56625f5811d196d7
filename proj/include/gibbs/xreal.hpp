#pragma once

#include <mpfr.h>

#include <compare>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace gibbs {

// Mantissa width, in bits, of an extended-precision value.
struct Precision {
  static constexpr long kMinBits = 53;
  static constexpr long kDefaultBits = 128;

  constexpr Precision() = default;
  constexpr explicit Precision(long b) : bits(b < kMinBits ? kMinBits : b) {}

  constexpr Precision operator+(long extra) const { return Precision(bits + extra); }
  friend constexpr auto operator<=>(Precision, Precision) = default;

  long bits = kDefaultBits;
};

constexpr Precision max(Precision a, Precision b) { return a.bits >= b.bits ? a : b; }

// Extended-precision real backed by an MPFR value.
//
// Binary operations produce a result carrying the larger of the operand
// precisions. Mixed operations with built-in numbers use the XReal's
// precision. All rounding is to nearest.
class XReal {
 public:
  XReal() : XReal(Precision{}) {}
  explicit XReal(Precision p);
  XReal(double v, Precision p);
  template <std::integral I>
  XReal(I v, Precision p) : XReal(p) {
    if constexpr (std::is_signed_v<I>) {
      mpfr_set_si(v_, static_cast<long>(v), MPFR_RNDN);
    } else {
      mpfr_set_ui(v_, static_cast<unsigned long>(v), MPFR_RNDN);
    }
  }

  // Parses a decimal literal exactly-rounded at precision p.
  static XReal parse(std::string_view text, Precision p);
  static XReal pi(Precision p);
  static XReal infinity(Precision p, int sign = 1);

  XReal(const XReal& other);
  XReal(XReal&& other) noexcept;
  XReal& operator=(const XReal& other);
  XReal& operator=(XReal&& other) noexcept;
  ~XReal();

  Precision precision() const { return Precision(mpfr_get_prec(v_)); }
  // Copy rounded (or exactly widened) to precision p.
  XReal at(Precision p) const;

  XReal& operator+=(const XReal& o);
  XReal& operator-=(const XReal& o);
  XReal& operator*=(const XReal& o);
  XReal& operator/=(const XReal& o);
  XReal& operator+=(long o);
  XReal& operator-=(long o);
  XReal& operator*=(long o);
  XReal& operator/=(long o);
  XReal& operator+=(double o);
  XReal& operator-=(double o);
  XReal& operator*=(double o);
  XReal& operator/=(double o);

  XReal operator-() const;

  friend XReal operator+(XReal a, const XReal& b) { return a += b; }
  friend XReal operator-(XReal a, const XReal& b) { return a -= b; }
  friend XReal operator*(XReal a, const XReal& b) { return a *= b; }
  friend XReal operator/(XReal a, const XReal& b) { return a /= b; }

  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator+(XReal a, T b) { return a += promote(b); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator-(XReal a, T b) { return a -= promote(b); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator*(XReal a, T b) { return a *= promote(b); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator/(XReal a, T b) { return a /= promote(b); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator+(T a, XReal b) { return b += promote(a); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator*(T a, XReal b) { return b *= promote(a); }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator-(T a, const XReal& b) { return XReal(promote(a), b.precision()) - b; }
  template <typename T>
    requires std::is_arithmetic_v<T>
  friend XReal operator/(T a, const XReal& b) { return XReal(promote(a), b.precision()) / b; }

  friend bool operator==(const XReal& a, const XReal& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }
  friend std::partial_ordering operator<=>(const XReal& a, const XReal& b);
  friend bool operator==(const XReal& a, double b) { return mpfr_cmp_d(a.v_, b) == 0; }
  friend std::partial_ordering operator<=>(const XReal& a, double b);

  int sign() const { return mpfr_sgn(v_); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_integer() const { return mpfr_integer_p(v_) != 0; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }
  // log2|x|, valid far outside the double exponent range. -inf for zero.
  double log2_abs() const;
  // Natural log of |x| as a double (same range caveats as log2_abs).
  double log_abs() const;

  // Decimal rendering with `digits` significant digits, trailing zeros
  // removed. Scientific notation below 1e-4 or at/above 10^digits.
  std::string to_string(int digits) const;
  // Significant decimal digits that the current precision supports.
  int decimal_digits() const;

  mpfr_srcptr get() const { return v_; }
  mpfr_ptr get() { return v_; }

 private:
  template <typename T>
  static auto promote(T v) {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<double>(v);
    } else {
      return static_cast<long>(v);
    }
  }
  void widen_to(mpfr_prec_t p);

  mpfr_t v_;
};

std::ostream& operator<<(std::ostream& os, const XReal& x);

XReal abs(XReal x);
XReal exp(const XReal& x);
XReal log(const XReal& x);
XReal log1p(const XReal& x);
XReal expm1(const XReal& x);
XReal sqrt(const XReal& x);
XReal sin(const XReal& x);
XReal pow(const XReal& base, const XReal& exponent);
XReal pow(const XReal& base, long exponent);
XReal floor(const XReal& x);
// Gamma function (any real x that is not a nonpositive integer).
XReal tgamma(const XReal& x);
// log|Gamma(x)| (positive x only; see log_gamma in special_fn for the checked op).
XReal lgamma_positive(const XReal& x);
XReal max(const XReal& a, const XReal& b);
XReal min(const XReal& a, const XReal& b);

// Relative difference |a - b| / |b| evaluated at the wider precision;
// returns |a| when b is zero.
XReal rel_diff(const XReal& a, const XReal& b);

}  // namespace gibbs
