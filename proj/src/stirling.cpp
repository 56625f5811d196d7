#include "gibbs/stirling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gibbs/errors.hpp"
#include "gibbs/special_fn.hpp"
#include "numeric_detail.hpp"

namespace gibbs {

using detail::bit_length;
using detail::log2_abs_rising;
using detail::log2_binomial;

StirlingTriangle::StirlingTriangle(double alpha, long n_max, long k_max, Precision p)
    : alpha_(alpha), n_max_(n_max), k_max_(k_max), precision_(p), zero_(0L, p) {}

StirlingTriangle StirlingTriangle::build(double alpha, long n_max, Precision p, long k_max) {
  detail::require_alpha(alpha);
  if (n_max < 1) throw DomainError("triangle needs n_max >= 1");
  if (k_max < 0 || k_max > n_max) k_max = n_max;

  StirlingTriangle tri(alpha, n_max, k_max, p);
  tri.row_start_.resize(static_cast<size_t>(n_max + 2));
  size_t offset = 0;
  for (long n = 0; n <= n_max; ++n) {
    tri.row_start_[static_cast<size_t>(n)] = offset;
    offset += static_cast<size_t>(std::min(n, k_max) + 1);
  }
  tri.row_start_[static_cast<size_t>(n_max + 1)] = offset;

  // Accumulate at extra precision; each cell is a sum of positive terms, so
  // the relative error grows at most linearly in n.
  const Precision w = p + (24 + bit_length(n_max));
  const XReal a(alpha, w);
  std::vector<XReal> prev{XReal(1L, w)};
  tri.entries_.reserve(offset);
  tri.entries_.push_back(XReal(1L, p));
  for (long n = 0; n < n_max; ++n) {
    const long width = std::min(n + 1, k_max);
    std::vector<XReal> next(static_cast<size_t>(width + 1), XReal(w));
    for (long k = 1; k <= width; ++k) {
      XReal v = prev[static_cast<size_t>(k - 1)];
      if (k <= std::min(n, k_max)) {
        v += (XReal(n, w) - a * k) * prev[static_cast<size_t>(k)];
      }
      next[static_cast<size_t>(k)] = std::move(v);
    }
    for (const XReal& v : next) tri.entries_.push_back(v.at(p));
    prev = std::move(next);
  }
  return tri;
}

const XReal& StirlingTriangle::at(long n, long k) const {
  if (n < 0 || n > n_max_) {
    throw CapacityError("triangle holds n <= " + std::to_string(n_max_) + ", requested n = " +
                        std::to_string(n));
  }
  if (k < 0 || k > n) return zero_;
  if (k > k_max_) {
    throw CapacityError("triangle holds k <= " + std::to_string(k_max_) + ", requested k = " +
                        std::to_string(k));
  }
  return entries_[index(n, k)];
}

XReal StirlingTriangle::max_recurrence_residual() const {
  const Precision w = precision_ + 32;
  const XReal a(alpha_, w);
  XReal worst(0L, w);
  for (long n = 1; n < n_max_; ++n) {
    for (long k = 1; k <= std::min(n, k_max_); ++k) {
      const XReal lhs = at(n + 1, k).at(w);
      const XReal rhs = at(n, k - 1).at(w) + (XReal(n, w) - a * k) * at(n, k).at(w);
      worst = max(worst, rel_diff(rhs, lhs));
    }
  }
  return worst;
}

XReal central_toscano(long n, long k, double alpha, Precision p) {
  detail::require_alpha(alpha);
  if (k < 1 || k > n) throw DomainError("Toscano formula needs 1 <= k <= n");

  // Size the working precision from the largest alternating term against a
  // lower bound for the result: S(n, k) >= (1-alpha)^{n-k}.
  double max_term = -INFINITY;
  for (long j = 1; j <= k; ++j) {
    max_term = std::max(max_term, log2_binomial(k, j) + log2_abs_rising(-static_cast<double>(j) * alpha, n));
  }
  const double result_floor = static_cast<double>(n - k) * std::log2(1.0 - alpha) +
                              static_cast<double>(k) * std::log2(alpha) +
                              std::lgamma(static_cast<double>(k) + 1.0) / M_LN2;
  const Precision w = p + (32 + bit_length(k) + detail::ceil_bits(max_term - result_floor));

  const XReal a(alpha, w);
  XReal sum(w);
  XReal binom(1L, w);
  for (long j = 1; j <= k; ++j) {
    binom *= (k - j + 1);
    binom /= j;
    XReal term = binom * rising_factorial(-(a * j), n);
    if (j % 2 == 1) term = -term;
    sum += term;
  }
  sum /= pow(a, k);
  sum /= tgamma(XReal(k + 1, w));
  return sum.at(p);
}

NoncentralParams::NoncentralParams(double alpha, long n, long k) : alpha_(alpha), n_(n), k_(k) {
  detail::require_alpha(alpha);
  if (n < 1 || k < 1 || k > n) throw DomainError("non-central parameters need 1 <= k <= n");
  if (!(static_cast<double>(n) - static_cast<double>(k) * alpha > 0.0)) {
    throw DomainError("non-centrality n - k alpha must be positive");
  }
}

XReal NoncentralParams::shift(Precision p) const { return XReal(n_, p) - XReal(alpha_, p) * k_; }

XReal noncentral_convolution(long m, long k_star, const NoncentralParams& params,
                             const StirlingTriangle& triangle) {
  if (m < 0 || k_star < 0 || k_star > m) throw DomainError("non-central number needs 0 <= k* <= m");
  if (triangle.alpha() != params.alpha()) {
    throw DomainError("triangle alpha does not match the non-central parameters");
  }
  if (m > triangle.n_max() || k_star > triangle.k_max()) {
    throw CapacityError("triangle too small for m = " + std::to_string(m) + ", k* = " +
                        std::to_string(k_star));
  }
  const Precision p = triangle.precision();
  const Precision w = p + (24 + bit_length(m));
  const XReal r = params.shift(w);

  // s runs from m down so C(m, s) and (r)_{m-s} update multiplicatively.
  XReal sum(w);
  XReal binom(1L, w);
  XReal rising(1L, w);
  for (long s = m; s >= k_star; --s) {
    sum += binom * rising * triangle.at(s, k_star).at(w);
    binom *= s;
    binom /= (m - s + 1);
    rising *= r + (m - s);
  }
  return sum.at(p);
}

XReal noncentral_direct(long m, long k_star, const NoncentralParams& params, Precision p) {
  if (m < 0 || k_star < 0 || k_star > m) throw DomainError("non-central number needs 0 <= k* <= m");
  const double alpha = params.alpha();
  const double r = params.shift();

  // Lower bound: the s = m convolution term, S(m, k*) >= (1-alpha)^{m-k*}.
  double max_term = -INFINITY;
  for (long j = 0; j <= k_star; ++j) {
    max_term = std::max(max_term, log2_binomial(k_star, j) +
                                      log2_abs_rising(r - static_cast<double>(j) * alpha, m));
  }
  const double result_floor = static_cast<double>(m - k_star) * std::log2(1.0 - alpha) +
                              static_cast<double>(k_star) * std::log2(alpha) +
                              std::lgamma(static_cast<double>(k_star) + 1.0) / M_LN2;
  const Precision w = p + (32 + bit_length(k_star) + detail::ceil_bits(max_term - result_floor));

  const XReal a(alpha, w);
  const XReal rw = params.shift(w);
  XReal sum(w);
  XReal binom(1L, w);
  for (long j = 0; j <= k_star; ++j) {
    if (j > 0) {
      binom *= (k_star - j + 1);
      binom /= j;
    }
    XReal term = binom * rising_factorial(rw - a * j, m);
    if (j % 2 == 1) term = -term;
    sum += term;
  }
  sum /= pow(a, k_star);
  sum /= tgamma(XReal(k_star + 1, w));
  return sum.at(p);
}

std::vector<XReal> noncentral_row(long m, const NoncentralParams& params, Precision p) {
  if (m < 0) throw DomainError("non-central row needs m >= 0");
  const Precision w = p + (24 + bit_length(m));
  const XReal a(params.alpha(), w);
  const XReal r = params.shift(w);
  std::vector<XReal> row{XReal(1L, w)};
  for (long j = 0; j < m; ++j) {
    std::vector<XReal> next(static_cast<size_t>(j + 2), XReal(w));
    for (long k = 0; k <= j + 1; ++k) {
      XReal v(w);
      if (k >= 1) v = row[static_cast<size_t>(k - 1)];
      if (k <= j) v += (r + j - a * k) * row[static_cast<size_t>(k)];
      next[static_cast<size_t>(k)] = std::move(v);
    }
    row = std::move(next);
  }
  std::vector<XReal> out;
  out.reserve(row.size());
  for (const XReal& v : row) out.push_back(v.at(p));
  return out;
}

}  // namespace gibbs
