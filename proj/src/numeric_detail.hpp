#pragma once

// Helpers shared by the implementation files; not part of the public API.

#include <bit>
#include <cmath>
#include <string>

#include "gibbs/errors.hpp"

namespace gibbs::detail {

inline long bit_length(long n) {
  return n <= 0 ? 0 : static_cast<long>(std::bit_width(static_cast<unsigned long>(n)));
}

inline void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

// log2 |(x)_n|; -inf when a factor vanishes.
inline double log2_abs_rising(double x, long n) {
  if (n <= 0) return 0.0;
  if (n <= 4096) {
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
      const double f = std::fabs(x + static_cast<double>(i));
      if (f == 0.0) return -INFINITY;
      acc += std::log2(f);
    }
    return acc;
  }
  // Zero factor iff x is a nonpositive integer with |x| < n.
  if (x <= 0.0 && x == std::floor(x) && -x < static_cast<double>(n)) return -INFINITY;
  return (std::lgamma(x + static_cast<double>(n)) - std::lgamma(x)) / M_LN2;
}

inline double log2_binomial(long n, long k) {
  return (std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
          std::lgamma(static_cast<double>(n - k) + 1.0)) /
         M_LN2;
}

inline long ceil_bits(double bits) { return bits <= 0.0 ? 0 : static_cast<long>(std::ceil(bits)); }

}  // namespace gibbs::detail
