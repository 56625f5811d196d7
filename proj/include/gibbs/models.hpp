#pragma once

#include <map>
#include <memory>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "gibbs/special_fn.hpp"
#include "gibbs/xreal.hpp"

namespace gibbs {

enum class Family { pd, ngg };

// Prior specification of an alpha-Gibbs partition: two-parameter
// Poisson-Dirichlet PD(alpha, theta) or normalized generalized Gamma
// NGG(alpha, beta). The normalized inverse Gaussian is NGG(1/2, beta).
class GibbsModel {
 public:
  static GibbsModel pd(double alpha, double theta, Precision p = Precision{});
  static GibbsModel ngg(double alpha, double beta, Precision p = Precision{});
  static GibbsModel nig(double beta, Precision p = Precision{}) { return ngg(0.5, beta, p); }

  Family family() const { return family_; }
  double alpha() const { return alpha_; }
  double theta() const;
  double beta() const;
  Precision precision() const { return precision_; }
  GibbsModel with_precision(Precision p) const;

  // Tilting function h(t) against the stable law of normalization `norm`.
  XReal tilt(const XReal& t, StableNormalization norm) const;
  // Normalization under which the customary form of h is written:
  // c = 1 for PD, c = 2 for NGG.
  StableNormalization native_normalization() const;

  // "pd:<alpha>,<theta>", "ngg:<alpha>,<beta>" or "nig:<beta>".
  std::string spec() const;

  friend bool operator==(const GibbsModel&, const GibbsModel&) = default;

 private:
  GibbsModel(Family f, double alpha, double param, Precision p)
      : family_(f), alpha_(alpha), param_(param), precision_(p) {}

  Family family_;
  double alpha_;
  double param_;
  Precision precision_;
};

// Observed sample summary: block sizes in order of appearance.
class PartitionState {
 public:
  explicit PartitionState(std::vector<long> sizes);
  // State with only (n, k) known; sizes are left empty.
  static PartitionState counts_only(long n, long k);

  long n() const { return n_; }
  long k() const { return k_; }
  const std::vector<long>& sizes() const { return sizes_; }
  bool has_sizes() const { return !sizes_.empty(); }

 private:
  struct CountsTag {};
  PartitionState(CountsTag, long n, long k) : n_(n), k_(k) {}

  long n_ = 0;
  long k_ = 0;
  std::vector<long> sizes_;
};

// Optional record of how an extended-precision weight was obtained.
struct WeightDiagnostics {
  long working_bits = 0;
  int escalations = 0;
};

// Gibbs weight V(n, k) for 1 <= k <= n, returned at the model's precision.
// PD uses the closed form; NGG uses the alternating incomplete-Gamma sum at a
// working precision that doubles until two successive evaluations agree.
// Throws PrecisionError rather than return a nonpositive weight.
XReal weight(const GibbsModel& model, long n, long k, WeightDiagnostics* diag = nullptr);

// |V(n,k) - (n - k alpha) V(n+1,k) - V(n+1,k+1)| / V(n,k).
XReal recursion_residual(const GibbsModel& model, long n, long k);

// V(n,k) prod_j (1-alpha)_{n_j - 1}.
XReal eppf(const GibbsModel& model, const PartitionState& state);

struct Predictive {
  XReal p_new;
  std::vector<XReal> p_join;
};

// V(n+1,k+1)/V(n,k).
XReal new_block_probability(const GibbsModel& model, long n, long k);

// One-step prediction rule: a new block with V(n+1,k+1)/V(n,k), block j with
// (n_j - alpha) V(n+1,k)/V(n,k).
Predictive predictive(const GibbsModel& model, const PartitionState& state);

// Memo of extended-precision weights for one model. Lookups and inserts are
// safe from concurrent threads; cached values equal uncached ones.
class WeightCache {
 public:
  explicit WeightCache(GibbsModel model) : model_(std::move(model)) {}

  const GibbsModel& model() const { return model_; }
  XReal get(long n, long k) const;

 private:
  GibbsModel model_;
  mutable std::shared_mutex mutex_;
  mutable std::map<std::pair<long, long>, XReal> values_;
};

// Natural log of V(n, k) in double precision. For NGG this integrates the
// positive representation
//   V(n,k) = e^beta alpha^{k-1} / Gamma(n) int_beta^inf (1 - (beta/x)^{1/alpha})^{n-1} x^{k-1} e^{-x} dx
// by tanh-sinh quadrature; it is an independent route to the exact sum.
double log_weight_quadrature(const GibbsModel& model, long n, long k);

// Double-precision table of one-step new-block probabilities
// V(n+1,k+1)/V(n,k) for 1 <= k <= n <= n_max. NGG rows are filled by the
// backward recursion (all-positive, in log space) from a quadrature top row.
class PredictiveTable {
 public:
  PredictiveTable(const GibbsModel& model, long n_max);

  long n_max() const { return n_max_; }
  double p_new(long n, long k) const;
  // log V(n, k) for n <= n_max + 1.
  double log_weight(long n, long k) const;

 private:
  size_t index(long n, long k) const { return static_cast<size_t>((n - 1) * n / 2 + (k - 1)); }

  GibbsModel model_;
  long n_max_;
  std::vector<double> log_v_;  // rows 1 .. n_max + 1
};

// Density at s of the almost-sure limit of K_n / n^alpha under the model,
// h(s^{-1/alpha}) g_alpha(s) with h and g_alpha taken in the same stable
// normalization `norm` (the value does not depend on the choice).
XReal diversity_density(const GibbsModel& model, const XReal& s, StableNormalization norm);

}  // namespace gibbs
