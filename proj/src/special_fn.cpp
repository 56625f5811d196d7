#include "gibbs/special_fn.hpp"

#include <gmp.h>

#include <algorithm>
#include <cmath>
#include <string>

#include "gibbs/errors.hpp"
#include "numeric_detail.hpp"

namespace gibbs {

using detail::bit_length;
using detail::require_alpha;

namespace {

constexpr long kMaxSeriesBits = 1L << 14;

// Gamma(f; x) for f in (0,1) via the lower series (small x) or the Legendre
// continued fraction (large x). Retries with more guard bits when the
// subtraction Gamma(f) - gamma(f, x) cancels.
XReal upper_gamma_seed(const XReal& f, const XReal& x, Precision p) {
  long guard = 32;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const Precision w = p + guard;
    const XReal fw = f.at(w);
    const XReal xw = x.at(w);
    const XReal prefactor = exp(fw * log(xw) - xw);

    if (x.to_double() > 0.35 * static_cast<double>(w.bits) + 20.0) {
      // Modified Lentz evaluation of the continued fraction.
      XReal tiny(w);
      mpfr_set_ui_2exp(tiny.get(), 1, -4 * w.bits - 64, MPFR_RNDN);
      XReal b = xw + 1L - fw;
      XReal c = 1L / tiny;
      XReal d = 1L / b;
      XReal h = d;
      bool converged = false;
      for (long i = 1; i < 100000 + 4 * w.bits; ++i) {
        const XReal an = -XReal(i, w) * (XReal(i, w) - fw);
        b += 2L;
        d = an * d + b;
        if (d.is_zero()) d = tiny;
        c = b + an / c;
        if (c.is_zero()) c = tiny;
        d = 1L / d;
        const XReal del = d * c;
        h *= del;
        if ((del - 1L).log2_abs() < -static_cast<double>(w.bits) - 2.0) {
          converged = true;
          break;
        }
      }
      if (!converged) throw NumericalError("incomplete gamma continued fraction did not converge");
      return (prefactor * h).at(p);
    }

    // gamma(f, x) = x^f e^{-x} sum_n x^n / (f (f+1) ... (f+n))
    XReal term = 1 / fw;
    XReal sum = term;
    for (long n = 1;; ++n) {
      term *= xw;
      term /= (fw + n);
      sum += term;
      if (term.log2_abs() < sum.log2_abs() - static_cast<double>(w.bits) - 4.0) break;
      if (n > 50 * w.bits + 100000) throw NumericalError("incomplete gamma series did not converge");
    }
    const XReal full = tgamma(fw);
    const XReal lower = prefactor * sum;
    const XReal result = full - lower;
    const double lost = full.log2_abs() - result.log2_abs();
    if (result.sign() > 0 && lost + 16.0 < static_cast<double>(guard)) {
      return result.at(p);
    }
    guard = static_cast<long>(std::ceil(std::max(lost, 0.0))) + 64 + guard;
  }
  throw PrecisionError("incomplete gamma seed lost too many bits to cancellation");
}

}  // namespace

StableNormalization::StableNormalization(double scale) : c(scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("stable normalization constant must be positive, got " + std::to_string(scale));
  }
}

XReal rising_factorial(const XReal& x, long n) {
  if (n < 0) throw DomainError("rising factorial needs n >= 0");
  const Precision p = x.precision();
  const Precision w = p + (16 + bit_length(n));
  XReal acc(1L, w);
  const XReal xw = x.at(w);
  for (long i = 0; i < n; ++i) {
    acc *= xw + i;
  }
  return acc.at(p);
}

XReal rising_factorial(double x, long n, Precision p) { return rising_factorial(XReal(x, p), n); }

XReal gen_rising_factorial(const XReal& x, long k, const XReal& alpha) {
  if (k < 0) throw DomainError("generalized rising factorial needs k >= 0");
  const Precision p = max(x.precision(), alpha.precision());
  const Precision w = p + (16 + bit_length(k));
  XReal acc(1L, w);
  XReal factor = x.at(w);
  const XReal aw = alpha.at(w);
  for (long i = 0; i < k; ++i) {
    acc *= factor;
    factor += aw;
  }
  return acc.at(p);
}

XReal gen_rising_factorial(double x, long k, double alpha, Precision p) {
  return gen_rising_factorial(XReal(x, p), k, XReal(alpha, p));
}

XReal log_gamma(const XReal& x) {
  if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0, got " + x.to_string(17));
  return lgamma_positive(x);
}

XReal log_gamma(double x, Precision p) { return log_gamma(XReal(x, p)); }

XReal binomial(long n, long k, Precision p) {
  if (k < 0 || k > n) return XReal(0L, p);
  mpz_t z;
  mpz_init(z);
  mpz_bin_uiui(z, static_cast<unsigned long>(n), static_cast<unsigned long>(k));
  XReal r(p);
  mpfr_set_z(r.get(), z, MPFR_RNDN);
  mpz_clear(z);
  return r;
}

std::vector<XReal> upper_incomplete_gamma_ladder(const XReal& a_top, long count, const XReal& x,
                                                 Precision p) {
  if (!(x > 0.0)) throw DomainError("upper incomplete gamma requires x > 0");
  if (count < 1) throw DomainError("ladder length must be positive");
  if (!a_top.is_finite()) throw DomainError("upper incomplete gamma requires finite a");

  // a_top = frac + top_offset with frac in [0,1); the seed sits at offset 0.
  const Precision pw0 = max(p, a_top.precision()) + bit_length(std::labs(a_top.to_long()) + count);
  const XReal fl = floor(a_top.at(pw0));
  const long top_offset = fl.to_long();
  const long bottom_offset = top_offset - (count - 1);
  const XReal frac = a_top.at(pw0) - fl;
  const bool integer_family = frac.is_zero();

  long guard = 32 + bit_length(count) + bit_length(std::labs(bottom_offset));
  for (int attempt = 0; attempt < 10; ++attempt) {
    const Precision w = p + guard;
    const XReal xw = x.at(w);
    const XReal fw = frac.at(w);

    XReal seed(w);
    if (integer_family) {
      // Gamma(0; x) = E1(x) = -Ei(-x)
      mpfr_eint(seed.get(), (-xw).get(), MPFR_RNDN);
      seed = -seed;
    } else {
      seed = upper_gamma_seed(fw, xw, w);
    }
    const XReal t_seed = exp(fw * log(xw) - xw);  // x^a e^{-x} at a = frac

    const long lo = std::min(bottom_offset, 0L);
    const long hi = std::max(top_offset, 0L);
    std::vector<XReal> values(static_cast<size_t>(hi - lo + 1), XReal(w));
    auto slot = [&](long offset) -> XReal& { return values[static_cast<size_t>(offset - lo)]; };
    slot(0) = seed;

    // Upward: Gamma(a+1; x) = a Gamma(a; x) + x^a e^{-x}, all terms nonnegative.
    {
      XReal g = seed;
      XReal t = t_seed;
      for (long o = 0; o < hi; ++o) {
        const XReal a = fw + o;
        g = a * g + t;
        t *= xw;
        slot(o + 1) = g;
      }
    }

    // Downward: Gamma(a-1; x) = (Gamma(a; x) - x^{a-1} e^{-x}) / (a-1).
    double lost = 0.0;
    {
      XReal g = seed;
      XReal t = t_seed;
      for (long o = 0; o > lo; --o) {
        t /= xw;
        const XReal am1 = fw + (o - 1);
        XReal diff = g - t;
        const double big = std::max(g.log2_abs(), t.log2_abs());
        const double cancel = big - diff.log2_abs();
        if (cancel > 0.0) lost += cancel;
        g = diff / am1;
        slot(o - 1) = g;
      }
    }

    if (lost + 16.0 < static_cast<double>(guard - bit_length(count))) {
      std::vector<XReal> out;
      out.reserve(static_cast<size_t>(count));
      for (long j = 0; j < count; ++j) {
        out.push_back(slot(top_offset - j).at(p));
      }
      return out;
    }
    guard = static_cast<long>(std::ceil(lost)) + 64 + bit_length(count);
  }
  throw PrecisionError("incomplete gamma recurrence could not reach the requested precision");
}

XReal upper_incomplete_gamma(const XReal& a, const XReal& x, Precision p) {
  return std::move(upper_incomplete_gamma_ladder(a, 1, x, p).front());
}

XReal upper_incomplete_gamma(double a, double x, Precision p) {
  return upper_incomplete_gamma(XReal(a, p), XReal(x, p), p);
}

XReal ml_density(const XReal& s, double alpha, StableNormalization norm, Precision p) {
  require_alpha(alpha);
  if (!(s > 0.0)) throw DomainError("ml_density requires s > 0");
  const Precision w0 = max(p, s.precision()) + 16;

  if (alpha == 0.5) {
    // g(s) = sqrt(c / pi) exp(-c s^2 / 4)
    const XReal c(norm.c, w0);
    const XReal sw = s.at(w0);
    return (sqrt(c / XReal::pi(w0)) * exp(-(c * sw * sw) / 4L)).at(p);
  }

  // Standard (c = 1) density, rescaled: g_c(s) = c^alpha g_1(c^alpha s), with
  //   g_1(y) = 1/(pi alpha) sum_{j>=1} (-1)^{j+1} Gamma(alpha j + 1)/j! sin(pi alpha j) y^{j-1}.
  const double y_d = std::pow(norm.c, alpha) * s.to_double();
  const double log_y = std::log(y_d);
  double peak = -INFINITY;
  long peak_j = 1;
  for (long j = 1; j < 1000000; ++j) {
    const double lt = std::lgamma(alpha * static_cast<double>(j) + 1.0) -
                      std::lgamma(static_cast<double>(j) + 1.0) + static_cast<double>(j - 1) * log_y;
    if (lt > peak) {
      peak = lt;
      peak_j = j;
    } else if (j > 2 * peak_j + 8) {
      break;
    }
  }
  const double peak_bits = std::max(0.0, peak / M_LN2);

  long guard = 32 + static_cast<long>(std::ceil(peak_bits));
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (guard > kMaxSeriesBits) {
      throw UnsupportedParameter("ml_density series at s=" + s.to_string(10) + ", alpha=" +
                                 std::to_string(alpha) + " needs more than " +
                                 std::to_string(kMaxSeriesBits) + " guard bits");
    }
    const Precision w = w0 + guard;
    const XReal aw(alpha, w);
    const XReal pi = XReal::pi(w);
    const XReal y = pow(XReal(norm.c, w), aw) * s.at(w);
    XReal sum(w);
    XReal ypow(1L, w);
    double max_term = -INFINITY;
    for (long j = 1;; ++j) {
      const XReal ja = aw * j;
      XReal term = exp(lgamma_positive(ja + 1L) - lgamma_positive(XReal(j + 1, w))) * sin(pi * ja) * ypow;
      if (j % 2 == 0) term = -term;
      sum += term;
      const double tl = term.is_zero() ? -INFINITY : term.log2_abs();
      max_term = std::max(max_term, tl);
      ypow *= y;
      // Past the peak the term envelope decreases, so the first omitted term
      // bounds the truncation error of the alternating sum.
      if (j > peak_j + 2 && !sum.is_zero()) {
        const double next = (std::lgamma(alpha * static_cast<double>(j + 1) + 1.0) -
                             std::lgamma(static_cast<double>(j + 2)) +
                             static_cast<double>(j) * std::log(y_d)) /
                            M_LN2;
        if (next < sum.log2_abs() - static_cast<double>(p.bits) - 8.0) break;
      }
      if (j > 4000000) throw NumericalError("ml_density series did not converge");
    }
    const double lost = sum.is_zero() ? static_cast<double>(w.bits) : max_term - sum.log2_abs();
    if (sum.sign() > 0 && lost + 24.0 < static_cast<double>(guard)) {
      const XReal scale = pow(XReal(norm.c, w), aw) / (pi * aw);
      return (scale * sum).at(p);
    }
    guard = static_cast<long>(std::ceil(std::max(lost, 0.0))) + 64;
  }
  throw UnsupportedParameter("ml_density series did not stabilize at s=" + s.to_string(10));
}

XReal ml_density(double s, double alpha, StableNormalization norm, Precision p) {
  return ml_density(XReal(s, p), alpha, norm, p);
}

XReal tilt_pd(const XReal& t, double alpha, double theta, StableNormalization norm) {
  require_alpha(alpha);
  if (!(theta > -alpha)) throw DomainError("PD tilt requires theta > -alpha");
  if (!(t > 0.0)) throw DomainError("tilt requires t > 0");
  const Precision w = t.precision() + 16;
  const XReal th(theta, w);
  const XReal a(alpha, w);
  const XReal log_k = lgamma_positive(th + 1L) - lgamma_positive(th / a + 1L);
  const XReal scaled = t.at(w) / XReal(norm.c, w);
  return exp(log_k - th * log(scaled)).at(t.precision());
}

XReal tilt_ngg(const XReal& t, double alpha, double beta, StableNormalization norm) {
  require_alpha(alpha);
  if (!(beta > 0.0)) throw DomainError("generalized Gamma tilt requires beta > 0");
  if (!(t > 0.0)) throw DomainError("tilt requires t > 0");
  const Precision w = t.precision() + 16;
  const XReal b(beta, w);
  const XReal rate = pow(b, 1 / XReal(alpha, w)) / XReal(norm.c, w);
  return exp(b - rate * t.at(w)).at(t.precision());
}

}  // namespace gibbs
