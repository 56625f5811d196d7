#include "gibbs/models.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <charconv>
#include <cmath>
#include <mutex>
#include <numeric>

#include "gibbs/errors.hpp"
#include "numeric_detail.hpp"

namespace gibbs {

using detail::bit_length;

namespace {

constexpr long kMaxWorkingBits = 1L << 22;

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_nk(long n, long k) {
  if (n < 1 || k < 1 || k > n) {
    throw DomainError("weights need 1 <= k <= n, got n = " + std::to_string(n) + ", k = " +
                      std::to_string(k));
  }
}

XReal pd_weight(const GibbsModel& model, long n, long k) {
  const Precision p = model.precision();
  const Precision w = p + (16 + bit_length(n));
  const XReal a(model.alpha(), w);
  const XReal th(model.theta(), w);
  const XReal num = gen_rising_factorial(th + a, k - 1, a);
  const XReal den = rising_factorial(th + 1L, n - 1);
  return (num / den).at(p);
}

// sum_{i=0}^{n-1} C(n-1, i) (-1)^i beta^{i/alpha} Gamma(k - i/alpha; beta) at
// working precision w.
XReal ngg_alternating_sum(double alpha, double beta, long n, long k, Precision w) {
  const XReal a(alpha, w);
  const XReal b(beta, w);
  const XReal inv = 1L / a;
  const XReal step = pow(b, inv);

  std::vector<XReal> gammas;
  gammas.reserve(static_cast<size_t>(n));
  if (inv.is_integer()) {
    // k - i/alpha walks an integer ladder: one recurrence serves every term.
    const long q = inv.to_long();
    const std::vector<XReal> ladder = upper_incomplete_gamma_ladder(XReal(k, w), (n - 1) * q + 1, b, w);
    for (long i = 0; i < n; ++i) gammas.push_back(ladder[static_cast<size_t>(i * q)]);
  } else {
    for (long i = 0; i < n; ++i) gammas.push_back(upper_incomplete_gamma(XReal(k, w) - inv * i, b, w));
  }

  XReal sum(w);
  XReal binom(1L, w);
  XReal bpow(1L, w);
  for (long i = 0; i < n; ++i) {
    XReal term = binom * bpow * gammas[static_cast<size_t>(i)];
    if (i % 2 == 1) term = -term;
    sum += term;
    binom *= (n - 1 - i);
    binom /= (i + 1);
    bpow *= step;
  }
  return sum;
}

// Upper bound on log2 of the largest term of the alternating sum.
double ngg_max_term_log2(double alpha, double beta, long n, long k) {
  double worst = -INFINITY;
  const double log2b = std::log2(beta);
  for (long i = 0; i < n; ++i) {
    const double a = static_cast<double>(k) - static_cast<double>(i) / alpha;
    // Gamma(a; x) <= x^{a-1} e^{-x} for a <= 1 and <= Gamma(a) otherwise.
    const double g = a <= 1.0 ? (a - 1.0) * log2b - beta / M_LN2 : std::lgamma(a) / M_LN2;
    const double t = detail::log2_binomial(n - 1, i) + static_cast<double>(i) / alpha * log2b + g;
    worst = std::max(worst, t);
  }
  return worst;
}

XReal ngg_weight(const GibbsModel& model, long n, long k, WeightDiagnostics* diag) {
  const Precision p = model.precision();
  const double alpha = model.alpha();
  const double beta = model.beta();

  // log2 of the sum is estimated from the quadrature route; the working
  // precision covers the gap to the largest term.
  double loss = 0.0;
  try {
    const double log_v = log_weight_quadrature(model, n, k);
    const double log_sum = log_v + std::lgamma(static_cast<double>(n)) - beta -
                           static_cast<double>(k - 1) * std::log(alpha);
    loss = std::max(0.0, ngg_max_term_log2(alpha, beta, n, k) - log_sum / M_LN2);
  } catch (const Error&) {
    loss = static_cast<double>(p.bits);
  }

  Precision w = p + (64 + bit_length(n) + detail::ceil_bits(loss));
  XReal previous = ngg_alternating_sum(alpha, beta, n, k, w);
  int escalations = 0;
  const double agree_log2 = -static_cast<double>(p.bits) - std::log2(100.0);
  while (true) {
    const Precision w2(w.bits * 2);
    if (w2.bits > kMaxWorkingBits) {
      throw PrecisionError("generalized Gamma weight V(" + std::to_string(n) + "," +
                           std::to_string(k) + ") did not stabilize below " +
                           std::to_string(kMaxWorkingBits) + " bits");
    }
    XReal current = ngg_alternating_sum(alpha, beta, n, k, w2);
    const bool agree = previous.sign() > 0 && current.sign() > 0 &&
                       rel_diff(previous, current).log2_abs() <= agree_log2;
    if (agree) {
      if (diag != nullptr) {
        diag->working_bits = w2.bits;
        diag->escalations = escalations;
      }
      const XReal a(alpha, w2);
      const XReal b(beta, w2);
      XReal v = exp(b) * pow(a, k - 1) / tgamma(XReal(n, w2)) * current;
      if (!(v.sign() > 0)) throw PrecisionError("nonpositive generalized Gamma weight");
      return v.at(p);
    }
    previous = std::move(current);
    w = w2;
    ++escalations;
  }
}

}  // namespace

GibbsModel GibbsModel::pd(double alpha, double theta, Precision p) {
  detail::require_alpha(alpha);
  if (!(theta > -alpha) || !std::isfinite(theta)) {
    throw DomainError("PD model requires theta > -alpha, got theta = " + shortest(theta));
  }
  return GibbsModel(Family::pd, alpha, theta, p);
}

GibbsModel GibbsModel::ngg(double alpha, double beta, Precision p) {
  detail::require_alpha(alpha);
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw DomainError("generalized Gamma model requires beta > 0, got beta = " + shortest(beta));
  }
  return GibbsModel(Family::ngg, alpha, beta, p);
}

double GibbsModel::theta() const {
  if (family_ != Family::pd) throw DomainError("theta is defined for PD models only");
  return param_;
}

double GibbsModel::beta() const {
  if (family_ != Family::ngg) throw DomainError("beta is defined for generalized Gamma models only");
  return param_;
}

GibbsModel GibbsModel::with_precision(Precision p) const { return GibbsModel(family_, alpha_, param_, p); }

XReal GibbsModel::tilt(const XReal& t, StableNormalization norm) const {
  return family_ == Family::pd ? tilt_pd(t, alpha_, param_, norm) : tilt_ngg(t, alpha_, param_, norm);
}

StableNormalization GibbsModel::native_normalization() const {
  return family_ == Family::pd ? StableNormalization::standard() : StableNormalization::doubled();
}

std::string GibbsModel::spec() const {
  if (family_ == Family::pd) return "pd:" + shortest(alpha_) + "," + shortest(param_);
  if (alpha_ == 0.5) return "nig:" + shortest(param_);
  return "ngg:" + shortest(alpha_) + "," + shortest(param_);
}

PartitionState::PartitionState(std::vector<long> sizes) : sizes_(std::move(sizes)) {
  if (sizes_.empty()) throw DomainError("a partition needs at least one block");
  for (long s : sizes_) {
    if (s < 1) throw DomainError("block sizes must be positive");
  }
  n_ = std::accumulate(sizes_.begin(), sizes_.end(), 0L);
  k_ = static_cast<long>(sizes_.size());
}

PartitionState PartitionState::counts_only(long n, long k) {
  require_nk(n, k);
  return PartitionState(CountsTag{}, n, k);
}

XReal weight(const GibbsModel& model, long n, long k, WeightDiagnostics* diag) {
  require_nk(n, k);
  if (model.family() == Family::pd) {
    if (diag != nullptr) *diag = WeightDiagnostics{model.precision().bits + 16 + bit_length(n), 0};
    return pd_weight(model, n, k);
  }
  return ngg_weight(model, n, k, diag);
}

XReal recursion_residual(const GibbsModel& model, long n, long k) {
  require_nk(n, k);
  const XReal v = weight(model, n, k);
  const XReal a(model.alpha(), v.precision());
  const XReal rhs = (XReal(n, v.precision()) - a * k) * weight(model, n + 1, k) + weight(model, n + 1, k + 1);
  return rel_diff(rhs, v);
}

XReal eppf(const GibbsModel& model, const PartitionState& state) {
  if (!state.has_sizes()) throw DomainError("the EPPF needs block sizes");
  XReal p = weight(model, state.n(), state.k());
  const XReal one_minus_alpha = 1L - XReal(model.alpha(), p.precision());
  for (long size : state.sizes()) p *= rising_factorial(one_minus_alpha, size - 1);
  return p;
}

XReal new_block_probability(const GibbsModel& model, long n, long k) {
  const auto wm = model.with_precision(model.precision() + 16);
  return (weight(wm, n + 1, k + 1) / weight(wm, n, k)).at(model.precision());
}

Predictive predictive(const GibbsModel& model, const PartitionState& state) {
  const long n = state.n();
  const long k = state.k();
  const Precision w = model.precision() + 16;
  const auto wm = model.with_precision(w);
  const XReal v = weight(wm, n, k);
  const XReal v_same = weight(wm, n + 1, k);
  Predictive out{new_block_probability(model, n, k), {}};
  const XReal a(model.alpha(), w);
  for (long size : state.sizes()) out.p_join.push_back(((XReal(size, w) - a) * v_same / v).at(model.precision()));
  return out;
}

XReal WeightCache::get(long n, long k) const {
  const auto key = std::make_pair(n, k);
  {
    std::shared_lock lock(mutex_);
    if (auto it = values_.find(key); it != values_.end()) return it->second;
  }
  XReal v = weight(model_, n, k);
  std::unique_lock lock(mutex_);
  return values_.try_emplace(key, std::move(v)).first->second;
}

double log_weight_quadrature(const GibbsModel& model, long n, long k) {
  require_nk(n, k);
  const double alpha = model.alpha();
  if (model.family() == Family::pd) {
    const double th = model.theta();
    // (theta+alpha)_{k-1,alpha} = alpha^{k-1} Gamma(theta/alpha + k) / Gamma(theta/alpha + 1)
    return static_cast<double>(k - 1) * std::log(alpha) + std::lgamma(th / alpha + static_cast<double>(k)) -
           std::lgamma(th / alpha + 1.0) + std::lgamma(th + 1.0) - std::lgamma(th + static_cast<double>(n));
  }

  const double beta = model.beta();
  const double inv = 1.0 / alpha;
  const double nm1 = static_cast<double>(n - 1);
  const double km1 = static_cast<double>(k - 1);
  auto phi = [&](double x) {
    const double y = std::pow(beta / x, inv);
    return nm1 * std::log1p(-y) + km1 * std::log(x) - x;
  };
  auto dphi = [&](double x) {
    const double y = std::pow(beta / x, inv);
    return nm1 * inv * y / (x * (1.0 - y)) + km1 / x - 1.0;
  };

  // phi is concave on (beta, inf): locate the mode, then the window where the
  // integrand is within e^-60 of its peak.
  double mode = beta;
  if (n > 1 || dphi(beta * (1.0 + 1e-12)) > 0.0) {
    double lo = beta;
    double hi = std::max(2.0 * beta, static_cast<double>(k) + 1.0);
    while (dphi(hi) > 0.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (dphi(mid) > 0.0 ? lo : hi) = mid;
    }
    mode = 0.5 * (lo + hi);
  }
  const double peak = n > 1 || mode > beta ? phi(mode) : km1 * std::log(beta) - beta;
  constexpr double kDrop = 60.0;

  double left = beta;
  if (n > 1) {
    double lo = beta;
    double hi = mode;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) < peak - kDrop ? lo : hi) = mid;
    }
    left = lo;
  }
  double right = std::max(mode, beta) + 1.0;
  while (phi(right) > peak - kDrop) right = mode + 2.0 * (right - mode);
  {
    double lo = std::max(mode, beta);
    double hi = right;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (phi(mid) > peak - kDrop ? lo : hi) = mid;
    }
    right = hi;
  }

  boost::math::quadrature::tanh_sinh<double> integrator;
  double err = 0.0;
  const double integral = integrator.integrate(
      [&](double x) {
        if (x <= beta) return 0.0;
        return std::exp(phi(x) - peak);
      },
      left, right, 1e-14, &err);
  if (!(integral > 0.0) || !std::isfinite(integral)) {
    throw NumericalError("quadrature of the generalized Gamma weight failed");
  }
  return beta + km1 * std::log(alpha) - std::lgamma(static_cast<double>(n)) + peak + std::log(integral);
}

PredictiveTable::PredictiveTable(const GibbsModel& model, long n_max) : model_(model), n_max_(n_max) {
  if (n_max < 1) throw DomainError("predictive table needs n_max >= 1");
  const long top = n_max + 1;
  log_v_.assign(static_cast<size_t>(top * (top + 1) / 2), 0.0);
  if (model.family() == Family::pd) {
    for (long n = 1; n <= top; ++n) {
      for (long k = 1; k <= n; ++k) log_v_[index(n, k)] = log_weight_quadrature(model, n, k);
    }
    return;
  }
  for (long k = 1; k <= top; ++k) log_v_[index(top, k)] = log_weight_quadrature(model, top, k);
  const double alpha = model.alpha();
  for (long n = top - 1; n >= 1; --n) {
    for (long k = 1; k <= n; ++k) {
      const double a = std::log(static_cast<double>(n) - static_cast<double>(k) * alpha) + log_v_[index(n + 1, k)];
      const double b = log_v_[index(n + 1, k + 1)];
      const double hi = std::max(a, b);
      log_v_[index(n, k)] = hi + std::log1p(std::exp(std::min(a, b) - hi));
    }
  }
}

double PredictiveTable::log_weight(long n, long k) const {
  if (n < 1 || n > n_max_ + 1 || k < 1 || k > n) {
    throw CapacityError("predictive table does not hold V(" + std::to_string(n) + "," + std::to_string(k) + ")");
  }
  return log_v_[index(n, k)];
}

double PredictiveTable::p_new(long n, long k) const {
  if (model_.family() == Family::pd) {
    if (n < 1 || k < 1 || k > n) throw DomainError("p_new needs 1 <= k <= n");
    return (model_.theta() + static_cast<double>(k) * model_.alpha()) / (model_.theta() + static_cast<double>(n));
  }
  if (n > n_max_) throw CapacityError("predictive table holds n <= " + std::to_string(n_max_));
  return std::exp(log_v_[index(n + 1, k + 1)] - log_v_[index(n, k)]);
}

XReal diversity_density(const GibbsModel& model, const XReal& s, StableNormalization norm) {
  if (!(s > 0.0)) throw DomainError("diversity density needs s > 0");
  const Precision w = s.precision() + 16;
  const XReal a(model.alpha(), w);
  const XReal c(norm.c, w);
  const XReal sw = s.at(w);
  // Limit of K_n/n^alpha is T^{-alpha} with T standard stable; express both
  // factors through the c-normalized functions.
  const XReal h = model.tilt(c * pow(sw, -(1L / a)), norm);
  const XReal ca = pow(c, a);
  const XReal g = ml_density(sw / ca, model.alpha(), norm, w) / ca;
  return (h * g).at(s.precision());
}

}  // namespace gibbs
