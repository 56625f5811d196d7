#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/stirling.hpp"
#include "gibbs/xreal.hpp"

namespace gibbs {

// How the tilting function and the diversity density are paired.
//   consistent: h and g_alpha are both taken against the same stable law, so
//               the result does not depend on the normalization constant.
//   as_printed: h is used in the model's customary form (c = 1 for PD, c = 2
//               for NGG) while the Stirling asymptotics keep the standard law.
//               For NGG this reproduces the displayed formulas
//               exp{beta - (n/2)(beta/k)^{1/alpha}}, which do not converge
//               to the exact weights.
enum class Convention { consistent, as_printed };

// Scale of s = k* / M^alpha inside the discovery sum.
//   next_draw: M = m + 1, matching the (m+1) factors of the same summand.
//   sample:    M = m.
//   shifted:   s = (k*+1)/(m+1)^alpha, the block count of the posterior ratio
//              actually being approximated.
enum class DiscoveryScale { next_draw, sample, shifted };

struct ApproxOptions {
  StableNormalization norm{};
  Convention convention = Convention::consistent;
  DiscoveryScale discovery_scale = DiscoveryScale::shifted;
};

struct ApproxReport {
  std::optional<XReal> exact;
  XReal approx;
  std::optional<XReal> rel_error;
  std::vector<std::pair<std::string, std::string>> config;

  static ApproxReport make(XReal approx, std::optional<XReal> exact,
                           std::vector<std::pair<std::string, std::string>> config);
};

// h evaluated at t under the chosen convention.
XReal tilt_for(const GibbsModel& model, const XReal& t, const ApproxOptions& opts);

// V(n,k) ~ alpha^{k-1} Gamma(k)/Gamma(n) h[(k/n^alpha)^{-1/alpha}].
XReal prior_weight_approx(const GibbsModel& model, long n, long k, const ApproxOptions& opts = {});

// PD EPPF ~ prior weight approximation times prod_j (1-alpha)_{n_j-1}.
XReal pd_eppf_approx(double alpha, double theta, const PartitionState& state, Precision p = Precision{});

// S(m, k*; alpha, n - k alpha) ~
//   alpha^{1-k*} Gamma(m) / (Gamma(k*) Gamma(r)) m^{r-alpha}
//     int_0^1 (1-p)^{r-1} p^{-alpha-1} g_alpha(z p^{-alpha}) dp,   z = k*/m^alpha.
// The integral is taken in u = p^{-alpha}. Under the consistent convention
// g_alpha is the standard-law density; as_printed uses the density of
// normalization opts.norm.
XReal noncentral_stirling_approx(long m, long k_star, long n, long k, double alpha,
                                 const ApproxOptions& opts = {}, Precision p = Precision{});

// V(n+m, k+k*)/V(n,k) ~
//   alpha^{k+k*-1} h(s^{-1/alpha}) s^k Gamma(k*) m^{-(n-k alpha)} / (V(n,k) Gamma(m)),  s = k*/m^alpha,
// with V(n,k) exact.
XReal posterior_ratio_approx(const GibbsModel& model, long n, long k, long m, long k_star,
                             const ApproxOptions& opts = {});

// Direct Stirling approximation of the PD posterior ratio
//   alpha^{k*} k*^{theta/alpha+k} Gamma(k*) Gamma(theta+n) / (Gamma(m) Gamma(theta/alpha+k) m^{theta+n}).
XReal pd_posterior_ratio_direct(double alpha, double theta, long n, long k, long m, long k_star,
                                Precision p = Precision{});

struct DiscoveryApprox {
  XReal value;
  // k*-summands, k* = 0 .. m; the k* = 0 entry is the exact term.
  std::vector<XReal> terms;
  bool out_of_range = false;
};

// Discovery probability with the k* >= 1 posterior ratios replaced by their
// Stirling approximation; the k* = 0 term is exact.
DiscoveryApprox discovery_approx(const GibbsModel& model, long n, long k, long m, const ApproxOptions& opts = {});

}  // namespace gibbs
