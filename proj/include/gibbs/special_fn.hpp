#pragma once

#include <vector>

#include "gibbs/xreal.hpp"

namespace gibbs {

// Scale c of the stable Laplace exponent psi(lambda) = (c * lambda)^alpha.
// c = 1 is the standard stable law; c = 2 is the convention under which the
// generalized Gamma tilt exp{beta - (beta^{1/alpha} / 2) t} is a density.
struct StableNormalization {
  constexpr StableNormalization() = default;
  explicit StableNormalization(double scale);

  static constexpr StableNormalization standard() { return StableNormalization(Tag{}, 1.0); }
  static constexpr StableNormalization doubled() { return StableNormalization(Tag{}, 2.0); }

  double c = 2.0;

 private:
  struct Tag {};
  constexpr StableNormalization(Tag, double scale) : c(scale) {}
};

// x (x+1) ... (x+n-1); 1 for n = 0.
XReal rising_factorial(const XReal& x, long n);
XReal rising_factorial(double x, long n, Precision p = Precision{});

// x (x+alpha) ... (x+(k-1) alpha); 1 for k = 0.
XReal gen_rising_factorial(const XReal& x, long k, const XReal& alpha);
XReal gen_rising_factorial(double x, long k, double alpha, Precision p = Precision{});

// ln Gamma(x) for x > 0.
XReal log_gamma(const XReal& x);
XReal log_gamma(double x, Precision p = Precision{});

// Binomial coefficient C(n, k) as an extended real (exact while it fits).
XReal binomial(long n, long k, Precision p);

// Upper incomplete Gamma function int_x^inf t^{a-1} e^{-t} dt for x > 0 and
// any real a. Negative a is reached by downward recurrence from a seed in
// [0, 1); the recurrence runs with guard bits sized to the cancellation it
// actually meets.
XReal upper_incomplete_gamma(const XReal& a, const XReal& x, Precision p);
XReal upper_incomplete_gamma(double a, double x, Precision p = Precision{});

// Gamma(a_top - j; x) for j = 0 .. count-1, all from one recurrence pass.
std::vector<XReal> upper_incomplete_gamma_ladder(const XReal& a_top, long count, const XReal& x,
                                                 Precision p);

// Density at s > 0 of S = T^{-alpha}, T positive stable with Laplace
// exponent (c lambda)^alpha. Closed form at alpha = 1/2, alternating power
// series otherwise. Throws UnsupportedParameter when the series would need
// more working precision than the implementation allows.
XReal ml_density(const XReal& s, double alpha, StableNormalization norm, Precision p);
XReal ml_density(double s, double alpha, StableNormalization norm, Precision p = Precision{});

// Tilting functions h(t) relative to a stable law of normalization `norm`.
// The defaults reproduce the usual forms: the Poisson-Dirichlet polynomial
// tilt Gamma(theta+1)/Gamma(theta/alpha+1) t^{-theta} against the standard
// stable law, and the generalized Gamma exponential tilt
// exp{beta - (beta^{1/alpha}/2) t} against the c = 2 law.
XReal tilt_pd(const XReal& t, double alpha, double theta,
              StableNormalization norm = StableNormalization::standard());
XReal tilt_ngg(const XReal& t, double alpha, double beta,
               StableNormalization norm = StableNormalization::doubled());

}  // namespace gibbs
