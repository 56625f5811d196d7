#include "gibbs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <thread>

#include "gibbs/errors.hpp"

namespace gibbs {

namespace {

template <typename Fn>
std::vector<double> run_reps(long reps, std::uint64_t seed, unsigned threads, Fn&& fn) {
  if (reps < 1) throw DomainError("Monte Carlo needs reps >= 1");
  std::vector<double> values(static_cast<size_t>(reps));
  auto work = [&](long begin, long end) {
    for (long i = begin; i < end; ++i) {
      RandomStream rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
      values[static_cast<size_t>(i)] = fn(rng);
    }
  };
  const long workers = std::clamp<long>(threads, 1, reps);
  if (workers == 1) {
    work(0, reps);
    return values;
  }
  std::vector<std::jthread> pool;
  std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
  for (long t = 0; t < workers; ++t) {
    const long begin = reps * t / workers;
    const long end = reps * (t + 1) / workers;
    pool.emplace_back([&, t, begin, end] {
      try {
        work(begin, end);
      } catch (...) {
        errors[static_cast<size_t>(t)] = std::current_exception();
      }
    });
  }
  pool.clear();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return values;
}

// Number of new blocks among `steps` draws starting from (n, k).
long new_blocks(const PredictiveSource& source, long n, long k, long steps, RandomStream& rng) {
  long fresh = 0;
  for (long i = 0; i < steps; ++i) {
    if (n == 0 || rng.uniform() < source.p_new(n, k)) {
      ++k;
      ++fresh;
    }
    ++n;
  }
  return fresh;
}

// Index of the block joined, chosen with weight (size - alpha).
size_t pick_block(const std::vector<long>& sizes, long n, double alpha, RandomStream& rng) {
  const double total = static_cast<double>(n) - static_cast<double>(sizes.size()) * alpha;
  double target = rng.uniform() * total;
  for (size_t j = 0; j < sizes.size(); ++j) {
    target -= static_cast<double>(sizes[j]) - alpha;
    if (target < 0.0) return j;
  }
  return sizes.size() - 1;
}

void grow(const PredictiveSource& source, std::vector<long>& sizes, long& n, long steps, RandomStream& rng) {
  const double alpha = source.model().alpha();
  for (long i = 0; i < steps; ++i) {
    const long k = static_cast<long>(sizes.size());
    if (n == 0 || rng.uniform() < source.p_new(n, k)) {
      sizes.push_back(1);
    } else {
      ++sizes[pick_block(sizes, n, alpha, rng)];
    }
    ++n;
  }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 1));
}

long RandomStream::below(long n) {
  const long v = static_cast<long>(uniform() * static_cast<double>(n));
  return std::min(v, n - 1);
}

struct PredictiveSource::ExactMemo {
  explicit ExactMemo(const GibbsModel& model) : cache(model) {}
  WeightCache cache;
  std::mutex mutex;
  std::map<std::pair<long, long>, double> values;
};

PredictiveSource::PredictiveSource(const GibbsModel& model, long n_max, bool exact_weights)
    : model_(model), n_max_(n_max) {
  if (n_max < 1) throw DomainError("predictive source needs n_max >= 1");
  if (model.family() == Family::pd) return;
  if (exact_weights) {
    memo_ = std::make_unique<ExactMemo>(model.with_precision(model.precision() + 16));
  } else {
    table_.emplace(model, n_max);
  }
}

PredictiveSource::~PredictiveSource() = default;

double PredictiveSource::p_new(long n, long k) const {
  if (n < 1 || k < 1 || k > n) throw DomainError("new-block probability needs 1 <= k <= n");
  if (n > n_max_) throw CapacityError("predictive source holds n <= " + std::to_string(n_max_));
  if (model_.family() == Family::pd) {
    const double theta = model_.theta();
    return (theta + static_cast<double>(k) * model_.alpha()) / (theta + static_cast<double>(n));
  }
  if (table_) return table_->p_new(n, k);
  const auto key = std::make_pair(n, k);
  {
    std::lock_guard lock(memo_->mutex);
    if (auto it = memo_->values.find(key); it != memo_->values.end()) return it->second;
  }
  const double p = (memo_->cache.get(n + 1, k + 1) / memo_->cache.get(n, k)).to_double();
  std::lock_guard lock(memo_->mutex);
  return memo_->values.try_emplace(key, p).first->second;
}

PartitionState sample_partition(const PredictiveSource& source, long n, RandomStream& rng) {
  if (n < 1) throw DomainError("sample_partition needs n >= 1");
  std::vector<long> sizes;
  long count = 0;
  grow(source, sizes, count, n, rng);
  return PartitionState(std::move(sizes));
}

PartitionState sample_partition(const GibbsModel& model, long n, std::uint64_t seed, const SamplerOptions& opts) {
  const PredictiveSource source(model, std::max(n, 1L), opts.exact_weights);
  RandomStream rng(stream_seed(seed, 0));
  return sample_partition(source, n, rng);
}

ContinuationOutcome sample_continuation(const PredictiveSource& source, const PartitionState& state, long m,
                                        RandomStream& rng) {
  if (m < 0) throw DomainError("sample_continuation needs m >= 0");
  if (!state.has_sizes()) throw DomainError("sample_continuation needs block sizes");
  std::vector<long> sizes = state.sizes();
  long n = state.n();
  grow(source, sizes, n, m, rng);
  ContinuationOutcome out;
  out.sizes.assign(sizes.begin() + static_cast<std::ptrdiff_t>(state.k()), sizes.end());
  for (size_t i = out.sizes.size(); i > 1; --i) {
    std::swap(out.sizes[i - 1], out.sizes[static_cast<size_t>(rng.below(static_cast<long>(i)))]);
  }
  out.k_star = static_cast<long>(out.sizes.size());
  out.l_m = std::accumulate(out.sizes.begin(), out.sizes.end(), 0L);
  return out;
}

ContinuationOutcome sample_continuation(const GibbsModel& model, const PartitionState& state, long m,
                                        std::uint64_t seed, const SamplerOptions& opts) {
  const PredictiveSource source(model, state.n() + m, opts.exact_weights);
  RandomStream rng(stream_seed(seed, 0));
  return sample_continuation(source, state, m, rng);
}

McEstimate summarize(const std::vector<double>& values, std::uint64_t seed) {
  const double count = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double var = values.size() > 1 ? ss / (count - 1.0) : 0.0;
  return {mean, std::sqrt(var / count), static_cast<long>(values.size()), seed};
}

McEstimate mc_discovery(const GibbsModel& model, const PartitionState& state, long m, long reps, std::uint64_t seed,
                        const SamplerOptions& opts) {
  if (m < 0) throw DomainError("mc_discovery needs m >= 0");
  const PredictiveSource source(model, state.n() + m + 1, opts.exact_weights);
  const long n = state.n();
  const long k = state.k();
  const auto values = run_reps(reps, seed, opts.threads, [&](RandomStream& rng) {
    const long fresh = new_blocks(source, n, k, m, rng);
    return rng.uniform() < source.p_new(n + m, k + fresh) ? 1.0 : 0.0;
  });
  return summarize(values, seed);
}

McEstimate mc_expected_new_species(const GibbsModel& model, const PartitionState& state, long m, long reps,
                                   std::uint64_t seed, const SamplerOptions& opts) {
  if (m < 0) throw DomainError("mc_expected_new_species needs m >= 0");
  const PredictiveSource source(model, state.n() + m + 1, opts.exact_weights);
  const auto values = run_reps(reps, seed, opts.threads, [&](RandomStream& rng) {
    return static_cast<double>(new_blocks(source, state.n(), state.k(), m, rng));
  });
  return summarize(values, seed);
}

std::vector<double> mc_alpha_diversity(const GibbsModel& model, long n, long reps, std::uint64_t seed,
                                       const SamplerOptions& opts, const std::optional<PartitionState>& initial) {
  if (n < 1) throw DomainError("mc_alpha_diversity needs n >= 1");
  const long n0 = initial ? initial->n() : 0;
  const long k0 = initial ? initial->k() : 0;
  const PredictiveSource source(model, n0 + n + 1, opts.exact_weights);
  const double scale = std::pow(static_cast<double>(n), model.alpha());
  return run_reps(reps, seed, opts.threads, [&](RandomStream& rng) {
    return static_cast<double>(new_blocks(source, n0, k0, n, rng)) / scale;
  });
}

std::vector<long> mc_kn_counts(const GibbsModel& model, long n, long reps, std::uint64_t seed,
                               const SamplerOptions& opts) {
  if (n < 1) throw DomainError("mc_kn_counts needs n >= 1");
  const PredictiveSource source(model, n + 1, opts.exact_weights);
  const auto values = run_reps(reps, seed, opts.threads, [&](RandomStream& rng) {
    return static_cast<double>(new_blocks(source, 0, 0, n, rng));
  });
  std::vector<long> counts(static_cast<size_t>(n + 1), 0);
  for (double v : values) ++counts[static_cast<size_t>(v)];
  return counts;
}

}  // namespace gibbs
