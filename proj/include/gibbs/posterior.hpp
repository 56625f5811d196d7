#pragma once

#include <optional>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/xreal.hpp"

namespace gibbs {

// Statistics of m further draws after an observed sample: the number of new
// blocks k*, the number l_m of draws falling in new blocks, and the new
// block sizes in exchangeable random order.
struct ContinuationOutcome {
  long k_star = 0;
  long l_m = 0;
  std::vector<long> sizes;

  bool valid_for(long m) const;
  friend bool operator==(const ContinuationOutcome&, const ContinuationOutcome&) = default;
};

// Every outcome of m draws: l_m = 0 .. m, and for each l_m the compositions
// of l_m in lexicographic order.
class OutcomeEnumerator {
 public:
  explicit OutcomeEnumerator(long m);

  std::optional<ContinuationOutcome> next();

 private:
  long m_;
  long l_ = 0;
  bool started_ = false;
  std::vector<long> parts_;
};

std::vector<ContinuationOutcome> enumerate_outcomes(long m);

// V(n+m, k+k*) / V(n, k).
XReal posterior_ratio_exact(const GibbsModel& model, long n, long k, long m, long k_star);

// P(K_m = k*, L_m = l, (S_1..S_k*) = sizes | K_n = k)
//   = l!/(s_1!..s_k*! k*!) V(n+m,k+k*)/V(n,k) C(m,l) (n-k alpha)_{m-l} prod (1-alpha)_{s_i-1}.
XReal joint_continuation_pmf(const GibbsModel& model, long n, long k, long m, const ContinuationOutcome& outcome);

// P(K_m = k* | K_n = k) = V(n+m,k+k*)/V(n,k) S(m, k*; alpha, n - k alpha).
XReal posterior_km_pmf(const GibbsModel& model, long n, long k, long m, long k_star);

// The full pmf of K_m, k* = 0 .. m.
std::vector<XReal> posterior_km_distribution(const GibbsModel& model, long n, long k, long m);

// E[K_m | K_n = k].
XReal expected_new_species(const GibbsModel& model, long n, long k, long m);

// Probability that draw n+m+1 opens a new block given K_n = k, with the m
// intermediate draws unobserved:
//   sum_{k*=0}^m V(n+m+1,k+k*+1)/V(n,k) S(m, k*; alpha, n - k alpha).
XReal discovery_exact(const GibbsModel& model, long n, long k, long m);

}  // namespace gibbs
