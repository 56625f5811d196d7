#include "gibbs/xreal.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "gibbs/errors.hpp"

namespace gibbs {

XReal::XReal(Precision p) {
  mpfr_init2(v_, p.bits);
  mpfr_set_zero(v_, 1);
}

XReal::XReal(double v, Precision p) : XReal(p) { mpfr_set_d(v_, v, MPFR_RNDN); }

XReal XReal::parse(std::string_view text, Precision p) {
  XReal r(p);
  std::string s(text);
  if (mpfr_set_str(r.v_, s.c_str(), 10, MPFR_RNDN) != 0 && !r.is_finite()) {
    throw DomainError("not a number: '" + s + "'");
  }
  return r;
}

XReal XReal::pi(Precision p) {
  XReal r(p);
  mpfr_const_pi(r.v_, MPFR_RNDN);
  return r;
}

XReal XReal::infinity(Precision p, int sign) {
  XReal r(p);
  mpfr_set_inf(r.v_, sign);
  return r;
}

XReal::XReal(const XReal& other) {
  mpfr_init2(v_, mpfr_get_prec(other.v_));
  mpfr_set(v_, other.v_, MPFR_RNDN);
}

XReal::XReal(XReal&& other) noexcept {
  // Steal the limbs and leave `other` as a valid minimum-precision zero.
  v_[0] = other.v_[0];
  mpfr_init2(other.v_, Precision::kMinBits);
  mpfr_set_zero(other.v_, 1);
}

XReal& XReal::operator=(const XReal& other) {
  if (this != &other) {
    mpfr_set_prec(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  return *this;
}

XReal& XReal::operator=(XReal&& other) noexcept {
  if (this != &other) {
    mpfr_swap(v_, other.v_);
  }
  return *this;
}

XReal::~XReal() { mpfr_clear(v_); }

XReal XReal::at(Precision p) const {
  XReal r(p);
  mpfr_set(r.v_, v_, MPFR_RNDN);
  return r;
}

void XReal::widen_to(mpfr_prec_t p) {
  if (p > mpfr_get_prec(v_)) {
    mpfr_prec_round(v_, p, MPFR_RNDN);
  }
}

XReal& XReal::operator+=(const XReal& o) {
  widen_to(mpfr_get_prec(o.v_));
  mpfr_add(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator-=(const XReal& o) {
  widen_to(mpfr_get_prec(o.v_));
  mpfr_sub(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator*=(const XReal& o) {
  widen_to(mpfr_get_prec(o.v_));
  mpfr_mul(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator/=(const XReal& o) {
  widen_to(mpfr_get_prec(o.v_));
  mpfr_div(v_, v_, o.v_, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator+=(long o) {
  mpfr_add_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator-=(long o) {
  mpfr_sub_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator*=(long o) {
  mpfr_mul_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator/=(long o) {
  mpfr_div_si(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator+=(double o) {
  mpfr_add_d(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator-=(double o) {
  mpfr_sub_d(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator*=(double o) {
  mpfr_mul_d(v_, v_, o, MPFR_RNDN);
  return *this;
}
XReal& XReal::operator/=(double o) {
  mpfr_div_d(v_, v_, o, MPFR_RNDN);
  return *this;
}

XReal XReal::operator-() const {
  XReal r(*this);
  mpfr_neg(r.v_, r.v_, MPFR_RNDN);
  return r;
}

std::partial_ordering operator<=>(const XReal& a, const XReal& b) {
  if (mpfr_unordered_p(a.v_, b.v_)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp(a.v_, b.v_);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

std::partial_ordering operator<=>(const XReal& a, double b) {
  if (a.is_nan() || std::isnan(b)) return std::partial_ordering::unordered;
  const int c = mpfr_cmp_d(a.v_, b);
  return c < 0 ? std::partial_ordering::less
               : (c > 0 ? std::partial_ordering::greater : std::partial_ordering::equivalent);
}

double XReal::log2_abs() const {
  if (is_zero()) return -INFINITY;
  if (!is_finite()) return is_nan() ? NAN : INFINITY;
  long e = 0;
  const double m = mpfr_get_d_2exp(&e, v_, MPFR_RNDN);
  return std::log2(std::fabs(m)) + static_cast<double>(e);
}

double XReal::log_abs() const { return log2_abs() * M_LN2; }

int XReal::decimal_digits() const {
  return static_cast<int>(mpfr_get_str_ndigits(10, mpfr_get_prec(v_)));
}

std::string XReal::to_string(int digits) const {
  if (is_nan()) return "nan";
  if (!is_finite()) return sign() < 0 ? "-inf" : "inf";
  if (is_zero()) return "0";
  if (digits < 1) digits = 1;

  mpfr_exp_t e10 = 0;
  char* raw = mpfr_get_str(nullptr, &e10, 10, static_cast<size_t>(digits), v_, MPFR_RNDN);
  std::string mant(raw);
  mpfr_free_str(raw);

  std::string out;
  if (!mant.empty() && mant.front() == '-') {
    out.push_back('-');
    mant.erase(0, 1);
  }
  while (mant.size() > 1 && mant.back() == '0') mant.pop_back();
  // value = 0.mant * 10^e10, so the leading digit has decimal exponent e10 - 1.
  const long lead = static_cast<long>(e10) - 1;

  if (lead < -4 || lead >= digits) {
    out.push_back(mant[0]);
    if (mant.size() > 1) {
      out.push_back('.');
      out.append(mant, 1, std::string::npos);
    }
    out.push_back('e');
    out.push_back(lead < 0 ? '-' : '+');
    std::string ex = std::to_string(lead < 0 ? -lead : lead);
    if (ex.size() < 2) ex.insert(0, "0");
    out += ex;
  } else if (lead >= 0) {
    const auto int_len = static_cast<size_t>(lead + 1);
    if (mant.size() <= int_len) {
      out += mant;
      out.append(int_len - mant.size(), '0');
    } else {
      out.append(mant, 0, int_len);
      out.push_back('.');
      out.append(mant, int_len, std::string::npos);
    }
  } else {
    out += "0.";
    out.append(static_cast<size_t>(-lead - 1), '0');
    out += mant;
  }
  return out;
}

std::ostream& operator<<(std::ostream& os, const XReal& x) { return os << x.to_string(x.decimal_digits()); }

XReal abs(XReal x) {
  mpfr_abs(x.get(), x.get(), MPFR_RNDN);
  return x;
}

#define GIBBS_UNARY(name, fn)            \
  XReal name(const XReal& x) {           \
    XReal r(x.precision());              \
    fn(r.get(), x.get(), MPFR_RNDN);     \
    return r;                            \
  }

GIBBS_UNARY(exp, mpfr_exp)
GIBBS_UNARY(log, mpfr_log)
GIBBS_UNARY(log1p, mpfr_log1p)
GIBBS_UNARY(expm1, mpfr_expm1)
GIBBS_UNARY(sqrt, mpfr_sqrt)
GIBBS_UNARY(sin, mpfr_sin)
GIBBS_UNARY(tgamma, mpfr_gamma)
GIBBS_UNARY(lgamma_positive, mpfr_lngamma)

#undef GIBBS_UNARY

XReal floor(const XReal& x) {
  XReal r(x.precision());
  mpfr_floor(r.get(), x.get());
  return r;
}

XReal pow(const XReal& base, const XReal& exponent) {
  XReal r(max(base.precision(), exponent.precision()));
  mpfr_pow(r.get(), base.get(), exponent.get(), MPFR_RNDN);
  return r;
}

XReal pow(const XReal& base, long exponent) {
  XReal r(base.precision());
  mpfr_pow_si(r.get(), base.get(), exponent, MPFR_RNDN);
  return r;
}

XReal max(const XReal& a, const XReal& b) { return a >= b ? a : b; }
XReal min(const XReal& a, const XReal& b) { return a <= b ? a : b; }

XReal rel_diff(const XReal& a, const XReal& b) {
  XReal d = abs(a - b);
  if (b.is_zero()) return d;
  return d / abs(b);
}

}  // namespace gibbs
