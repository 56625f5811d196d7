#pragma once

#include <vector>

#include "gibbs/xreal.hpp"

namespace gibbs {

// Cached triangle of central generalized Stirling numbers S(n, k; alpha),
// the coefficients of (x)_n in the basis (x)_{k, alpha}, for 0 <= k <= n <= n_max.
// Filled by S(n+1, k) = S(n, k-1) + (n - k alpha) S(n, k) with S(0, 0) = 1
// and S(n, 0) = 0 for n >= 1. Columns may be capped at k_max when only the
// left part of the triangle is needed. Immutable once built.
class StirlingTriangle {
 public:
  static StirlingTriangle build(double alpha, long n_max, Precision p = Precision{},
                                long k_max = -1);

  double alpha() const { return alpha_; }
  long n_max() const { return n_max_; }
  long k_max() const { return k_max_; }
  Precision precision() const { return precision_; }

  // Entry S(n, k); zero outside 0 <= k <= n. Throws CapacityError for
  // n > n_max or a capped column k > k_max.
  const XReal& at(long n, long k) const;

  // Largest relative violation of the construction rule over interior cells.
  XReal max_recurrence_residual() const;

 private:
  StirlingTriangle(double alpha, long n_max, long k_max, Precision p);
  size_t index(long n, long k) const { return row_start_[static_cast<size_t>(n)] + static_cast<size_t>(k); }

  double alpha_;
  long n_max_;
  long k_max_;
  Precision precision_;
  std::vector<size_t> row_start_;
  std::vector<XReal> entries_;
  XReal zero_;
};

inline StirlingTriangle build_triangle(double alpha, long n_max, Precision p = Precision{}) {
  return StirlingTriangle::build(alpha, n_max, p, -1);
}

// Toscano's explicit alternating sum
//   S(n, k) = 1/(alpha^k k!) sum_{j=1}^k (-1)^j C(k, j) (-j alpha)_n,
// evaluated at a working precision sized from the largest term.
XReal central_toscano(long n, long k, double alpha, Precision p = Precision{});

// Parameters of the non-central numbers S(m, k*; alpha, r) with the
// non-centrality r = n - k alpha inherited from an observed sample.
class NoncentralParams {
 public:
  NoncentralParams(double alpha, long n, long k);

  double alpha() const { return alpha_; }
  long n() const { return n_; }
  long k() const { return k_; }
  // n - k alpha, exactly rounded at precision p.
  XReal shift(Precision p) const;
  double shift() const { return static_cast<double>(n_) - static_cast<double>(k_) * alpha_; }

 private:
  double alpha_;
  long n_;
  long k_;
};

// sum_{s=k*}^m C(m, s) (r)_{m-s} S(s, k*), using the triangle's entries.
// k* = 0 reduces to (r)_m through S(0, 0) = 1 and S(s, 0) = 0.
XReal noncentral_convolution(long m, long k_star, const NoncentralParams& params,
                             const StirlingTriangle& triangle);

// 1/(alpha^{k*} k*!) sum_{j=0}^{k*} (-1)^j C(k*, j) (r - j alpha)_m.
// The j = 0 term belongs in the sum; without it the value disagrees with the
// convolution definition.
XReal noncentral_direct(long m, long k_star, const NoncentralParams& params,
                        Precision p = Precision{});

// Row S(m, k*; alpha, r) for k* = 0 .. m by the non-central recurrence
//   S(j+1, k) = S(j, k-1) + (j + r - k alpha) S(j, k),  S(0, 0) = 1,
// whose terms are all positive. Agrees with the convolution route.
std::vector<XReal> noncentral_row(long m, const NoncentralParams& params, Precision p = Precision{});

}  // namespace gibbs
