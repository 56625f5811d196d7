#include "gibbs/approx.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <string>

#include "gibbs/errors.hpp"
#include "gibbs/special_fn.hpp"
#include "numeric_detail.hpp"

namespace gibbs {

namespace {

void require_counts(long n, long k) {
  if (n < 1 || k < 1 || k > n) throw DomainError("approximation needs 1 <= k <= n");
}

void require_posterior(long m, long k_star) {
  if (m < 1 || k_star < 1 || k_star > m) throw DomainError("posterior approximation needs 1 <= k* <= m");
}

// Diversity density used inside the non-central approximation, in double.
double g_for(double x, double alpha, const ApproxOptions& opts) {
  const StableNormalization norm = opts.norm;
  if (opts.convention == Convention::as_printed) return ml_density(x, alpha, norm, Precision(64)).to_double();
  const double ca = std::pow(norm.c, alpha);
  return ml_density(x / ca, alpha, norm, Precision(64)).to_double() / ca;
}

}  // namespace

ApproxReport ApproxReport::make(XReal approx, std::optional<XReal> exact,
                                std::vector<std::pair<std::string, std::string>> config) {
  ApproxReport r{std::move(exact), std::move(approx), std::nullopt, std::move(config)};
  if (r.exact) r.rel_error = abs(r.approx - *r.exact) / abs(*r.exact);
  return r;
}

XReal tilt_for(const GibbsModel& model, const XReal& t, const ApproxOptions& opts) {
  if (opts.convention == Convention::as_printed) return model.tilt(t, model.native_normalization());
  // h_c(c t) is the standard-law tilt at t for every c.
  return model.tilt(t * XReal(opts.norm.c, t.precision()), opts.norm);
}

XReal prior_weight_approx(const GibbsModel& model, long n, long k, const ApproxOptions& opts) {
  require_counts(n, k);
  const Precision w = model.precision() + 32;
  const XReal a(model.alpha(), w);
  const XReal s = XReal(k, w) / pow(XReal(n, w), a);
  const XReal t = pow(s, -(1L / a));
  const XReal front = exp(log(a) * (k - 1) + lgamma_positive(XReal(k, w)) - lgamma_positive(XReal(n, w)));
  return (front * tilt_for(model.with_precision(w), t, opts)).at(model.precision());
}

XReal pd_eppf_approx(double alpha, double theta, const PartitionState& state, Precision p) {
  if (!state.has_sizes()) throw DomainError("the EPPF approximation needs block sizes");
  const auto model = GibbsModel::pd(alpha, theta, p);
  XReal v = prior_weight_approx(model, state.n(), state.k());
  const XReal one_minus_alpha = 1L - XReal(alpha, p + 16);
  for (long size : state.sizes()) v *= rising_factorial(one_minus_alpha, size - 1);
  return v.at(p);
}

XReal noncentral_stirling_approx(long m, long k_star, long n, long k, double alpha, const ApproxOptions& opts,
                                 Precision p) {
  require_posterior(m, k_star);
  const NoncentralParams params(alpha, n, k);
  const double r = params.shift();
  const double z = static_cast<double>(k_star) / std::pow(static_cast<double>(m), alpha);

  // int_0^1 (1-p)^{r-1} p^{-alpha-1} g(z p^{-alpha}) dp = (1/alpha) int_1^inf (1 - u^{-1/alpha})^{r-1} g(z u) du
  auto integrand = [&](double u) {
    if (u <= 1.0) return 0.0;
    const double one_minus = -std::expm1(-std::log(u) / alpha);
    const double gv = g_for(z * u, alpha, opts);
    if (gv == 0.0) return 0.0;
    return std::exp((r - 1.0) * std::log(one_minus)) * gv;
  };

  // Truncate where the density is negligible; g decays faster than any
  // exponential, so the remaining tail is far below the quadrature tolerance.
  double peak = 0.0;
  double upper = 2.0;
  for (int it = 0; it < 200; ++it) {
    const double gv = g_for(z * upper, alpha, opts);
    peak = std::max(peak, gv);
    if (gv < 1e-20 * peak) break;
    upper *= 1.5;
  }

  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  double l1 = 0.0;
  const double integral = integrator.integrate(integrand, 1.0, upper, 1e-13, &err, &l1);
  if (!(integral > 0.0) || !std::isfinite(integral) || err > 1e-9 * integral) {
    throw NumericalError("non-central Stirling quadrature did not converge: integral = " + std::to_string(integral) +
                         ", error estimate = " + std::to_string(err) + ", upper limit = " + std::to_string(upper));
  }

  const Precision w = p + 32;
  const XReal a(alpha, w);
  const XReal rw = params.shift(w);
  const XReal mw(m, w);
  const XReal log_front = log(a) * (1 - k_star) + lgamma_positive(mw) - lgamma_positive(XReal(k_star, w)) -
                          lgamma_positive(rw) + (rw - a) * log(mw);
  return (exp(log_front) / a * XReal(integral, w)).at(p);
}

XReal posterior_ratio_approx(const GibbsModel& model, long n, long k, long m, long k_star, const ApproxOptions& opts) {
  require_posterior(m, k_star);
  const NoncentralParams params(model.alpha(), n, k);
  const Precision p = model.precision();
  const Precision w = p + 32;
  const XReal a(model.alpha(), w);
  const XReal mw(m, w);
  const XReal s = XReal(k_star, w) / pow(mw, a);
  const XReal h = tilt_for(model.with_precision(w), pow(s, -(1L / a)), opts);
  const XReal v = weight(model, n, k).at(w);
  const XReal log_rest = log(a) * (k + k_star - 1) + log(s) * k + lgamma_positive(XReal(k_star, w)) -
                         params.shift(w) * log(mw) - lgamma_positive(mw);
  return (h * exp(log_rest) / v).at(p);
}

XReal pd_posterior_ratio_direct(double alpha, double theta, long n, long k, long m, long k_star, Precision p) {
  require_posterior(m, k_star);
  require_counts(n, k);
  const Precision w = p + 32;
  const XReal a(alpha, w);
  const XReal th(theta, w);
  const XReal ks(k_star, w);
  const XReal mw(m, w);
  const XReal log_v = log(a) * k_star + log(ks) * (th / a + k) + lgamma_positive(ks) + lgamma_positive(th + n) -
                      lgamma_positive(mw) - lgamma_positive(th / a + k) - log(mw) * (th + n);
  return exp(log_v).at(p);
}

DiscoveryApprox discovery_approx(const GibbsModel& model, long n, long k, long m, const ApproxOptions& opts) {
  if (m < 1) throw DomainError("discovery approximation needs m >= 1");
  const NoncentralParams params(model.alpha(), n, k);
  const Precision p = model.precision();
  const Precision w = p + 32;
  const auto wm = model.with_precision(w);
  const XReal a(model.alpha(), w);
  const XReal v = weight(wm, n, k);
  const std::vector<XReal> stirling = noncentral_row(m, params, w);

  DiscoveryApprox out{XReal(p), {}, false};
  out.terms.reserve(static_cast<size_t>(m + 1));
  // k* = 0: Gamma(k*) and s = 0 leave the approximation undefined; this term
  // is taken exactly.
  XReal total = weight(wm, n + m + 1, k + 1) / v * stirling[0];
  out.terms.push_back(total.at(p));

  const XReal scale_base(opts.discovery_scale == DiscoveryScale::sample ? m : m + 1, w);
  const long shift = opts.discovery_scale == DiscoveryScale::shifted ? 1 : 0;
  const XReal scale = pow(scale_base, a);
  const XReal m1(m + 1, w);
  const XReal log_common = log(a) * k - params.shift(w) * log(m1) - lgamma_positive(m1) - log(v);
  for (long ks = 1; ks <= m; ++ks) {
    const XReal s = XReal(ks + shift, w) / scale;
    const XReal h = tilt_for(wm, pow(s, -(1L / a)), opts);
    const XReal log_rest = log_common + log(a) * ks + log(s) * k + lgamma_positive(XReal(ks + 1, w));
    XReal term = h * exp(log_rest) * stirling[static_cast<size_t>(ks)];
    total += term;
    out.terms.push_back(term.at(p));
  }
  out.value = total.at(p);
  out.out_of_range = !(out.value > 0.0 && out.value < 1.0);
  return out;
}

}  // namespace gibbs
