#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "gibbs/models.hpp"
#include "gibbs/posterior.hpp"

namespace gibbs {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long reps = 0;
  std::uint64_t seed = 0;
};

struct SamplerOptions {
  // Evaluate every new-block probability from extended-precision weights
  // instead of the double-precision table.
  bool exact_weights = false;
  // Worker threads; results do not depend on this.
  unsigned threads = 1;
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);
// Seed of stream i: splitmix64(splitmix64(seed) ^ splitmix64(i + 1)).
// Replication i of every Monte Carlo routine draws from stream i alone.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream);

// mt19937_64 with a portable uniform mapping (top 53 bits).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform on 0 .. n-1.
  long below(long n);

 private:
  std::mt19937_64 engine_;
};

// New-block probabilities V(n+1,k+1)/V(n,k) in double for n <= n_max.
// PD uses the closed form (theta + k alpha)/(theta + n); NGG reads a
// PredictiveTable, or memoized extended-precision ratios when exact weights
// are requested. Safe to share between threads.
class PredictiveSource {
 public:
  PredictiveSource(const GibbsModel& model, long n_max, bool exact_weights = false);
  ~PredictiveSource();
  PredictiveSource(const PredictiveSource&) = delete;
  PredictiveSource& operator=(const PredictiveSource&) = delete;

  const GibbsModel& model() const { return model_; }
  long n_max() const { return n_max_; }
  double p_new(long n, long k) const;

 private:
  struct ExactMemo;

  GibbsModel model_;
  long n_max_;
  std::optional<PredictiveTable> table_;
  std::unique_ptr<ExactMemo> memo_;
};

// Partition of [n] grown by the prediction rule; sizes in order of appearance.
PartitionState sample_partition(const PredictiveSource& source, long n, RandomStream& rng);
PartitionState sample_partition(const GibbsModel& model, long n, std::uint64_t seed, const SamplerOptions& opts = {});

// m further draws from `state`. New block sizes are returned in a uniformly
// random order.
ContinuationOutcome sample_continuation(const PredictiveSource& source, const PartitionState& state, long m,
                                        RandomStream& rng);
ContinuationOutcome sample_continuation(const GibbsModel& model, const PartitionState& state, long m,
                                        std::uint64_t seed, const SamplerOptions& opts = {});

// Indicator that draw n+m+1 opens a new block, averaged over reps.
McEstimate mc_discovery(const GibbsModel& model, const PartitionState& state, long m, long reps, std::uint64_t seed,
                        const SamplerOptions& opts = {});

// K_m after m further draws, averaged over reps.
McEstimate mc_expected_new_species(const GibbsModel& model, const PartitionState& state, long m, long reps,
                                   std::uint64_t seed, const SamplerOptions& opts = {});

// reps draws of K_n / n^alpha. With an initial state (n0, k0), n further
// draws are made and the count of new blocks is returned over n^alpha.
std::vector<double> mc_alpha_diversity(const GibbsModel& model, long n, long reps, std::uint64_t seed,
                                       const SamplerOptions& opts = {},
                                       const std::optional<PartitionState>& initial = std::nullopt);

// Counts of K_n = k, k = 0 .. n, over reps partitions of [n].
std::vector<long> mc_kn_counts(const GibbsModel& model, long n, long reps, std::uint64_t seed,
                               const SamplerOptions& opts = {});

// Mean and standard error of per-replication values, accumulated in order.
McEstimate summarize(const std::vector<double>& values, std::uint64_t seed);

}  // namespace gibbs
