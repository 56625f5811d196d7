#include "doctest.h"

#include <cmath>

#include "gibbs/errors.hpp"
#include "gibbs/posterior.hpp"
#include "gibbs/sampler.hpp"
#include "gibbs/stirling.hpp"

using namespace gibbs;

namespace {

// |empirical - p| within `z` binomial standard errors.
bool within(long hits, long reps, double p, double z = 3.0) {
  const double freq = static_cast<double>(hits) / static_cast<double>(reps);
  return std::abs(freq - p) <= z * std::sqrt(p * (1.0 - p) / static_cast<double>(reps));
}

bool within(const McEstimate& est, double target, double z = 3.0) {
  return std::abs(est.mean - target) <= z * est.std_error;
}

}  // namespace

TEST_CASE("stream seeds") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(stream_seed(1, 0) != stream_seed(1, 1));
  CHECK(stream_seed(1, 0) != stream_seed(2, 0));
  RandomStream a(stream_seed(42, 3));
  RandomStream b(stream_seed(42, 3));
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  RandomStream c(7);
  for (int i = 0; i < 1000; ++i) {
    const long v = c.below(5);
    CHECK(v >= 0);
    CHECK(v < 5);
  }
}

TEST_CASE("predictive source") {
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const PredictiveSource s(pd, 10);
  CHECK(s.p_new(1, 1) == doctest::Approx(0.75));
  CHECK(s.p_new(7, 3) == doctest::Approx(2.5 / 8.0));
  CHECK_THROWS_AS(s.p_new(11, 1), CapacityError);
  CHECK_THROWS_AS(s.p_new(3, 4), DomainError);
  const auto nig = GibbsModel::nig(1.0);
  const PredictiveSource table(nig, 30);
  const PredictiveSource exact(nig, 30, true);
  for (long n = 1; n <= 30; ++n) {
    for (long k = 1; k <= n; ++k) {
      const double ref = new_block_probability(nig, n, k).to_double();
      CHECK(std::abs(exact.p_new(n, k) - ref) <= 1e-15 * ref);
      CHECK(std::abs(table.p_new(n, k) - ref) <= 1e-9 * ref);
    }
  }
}

TEST_CASE("sample_partition") {
  const auto pd = GibbsModel::pd(0.5, 1.0);
  for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(sample_partition(pd, 1, seed).sizes() == std::vector<long>{1});
  const auto p = sample_partition(GibbsModel::nig(1.0), 50, 9);
  CHECK(p.n() == 50);
  CHECK(sample_partition(GibbsModel::nig(1.0), 50, 9).sizes() == p.sizes());

  const long reps = 100000;
  const PredictiveSource source(pd, 2);
  long two = 0;
  for (long i = 0; i < reps; ++i) {
    RandomStream rng(stream_seed(11, static_cast<std::uint64_t>(i)));
    if (sample_partition(source, 2, rng).k() == 2) ++two;
  }
  CHECK(within(two, reps, 0.75));

  const auto nig = GibbsModel::nig(1.0);
  const auto counts = mc_kn_counts(nig, 3, reps, 5);
  const auto tri = build_triangle(0.5, 3);
  for (long k = 1; k <= 3; ++k) {
    const double p_k = (weight(nig, 3, k) * tri.at(3, k)).to_double();
    CAPTURE(k);
    CHECK(within(counts[static_cast<size_t>(k)], reps, p_k));
  }
  CHECK(counts[0] == 0);
}

TEST_CASE("sample_continuation") {
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const PartitionState state({3, 1});
  CHECK(sample_continuation(pd, state, 0, 1) == ContinuationOutcome{0, 0, {}});

  const long m = 3;
  const long reps = 100000;
  const PredictiveSource source(pd, state.n() + m);
  const auto outcomes = enumerate_outcomes(m);
  std::vector<long> hits(outcomes.size(), 0);
  double k_sum = 0.0;
  for (long i = 0; i < reps; ++i) {
    RandomStream rng(stream_seed(3, static_cast<std::uint64_t>(i)));
    const auto o = sample_continuation(source, state, m, rng);
    REQUIRE(o.valid_for(m));
    k_sum += static_cast<double>(o.k_star);
    for (size_t j = 0; j < outcomes.size(); ++j) {
      if (outcomes[j] == o) ++hits[j];
    }
  }
  for (size_t j = 0; j < outcomes.size(); ++j) {
    const double p = joint_continuation_pmf(pd, state.n(), state.k(), m, outcomes[j]).to_double();
    CAPTURE(j);
    CHECK(within(hits[j], reps, p));
  }
  const auto est = mc_expected_new_species(pd, state, m, reps, 3);
  const double e_km = expected_new_species(pd, state.n(), state.k(), m).to_double();
  CHECK(within(est, e_km));
  CHECK(std::abs(k_sum / reps - e_km) < 3.0 * est.std_error);
}

TEST_CASE("Monte Carlo discovery") {
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const auto nig = GibbsModel::nig(1.0);
  const PartitionState state({4, 2, 2, 1, 1});
  for (const auto& model : {pd, nig}) {
    const auto zero = mc_discovery(model, state, 0, 100000, 17);
    CHECK(within(zero, new_block_probability(model, state.n(), state.k()).to_double()));
    const auto five = mc_discovery(model, state, 5, 100000, 18);
    CHECK(within(five, discovery_exact(model, state.n(), state.k(), 5).to_double()));
  }
  const auto big = sample_partition(pd, 20, 123);
  const auto est = mc_discovery(pd, big, 10, 100000, 19);
  CHECK(within(est, discovery_exact(pd, 20, big.k(), 10).to_double()));

  const auto a = mc_discovery(pd, state, 10, 20000, 5);
  const auto b = mc_discovery(pd, state, 10, 80000, 5);
  const auto c = mc_discovery(pd, state, 10, 40000, 5);
  CHECK(b.std_error / a.std_error == doctest::Approx(0.5).epsilon(0.2));
  CHECK(c.std_error / a.std_error == doctest::Approx(std::sqrt(0.5)).epsilon(0.2));
}

TEST_CASE("reproducibility and thread invariance") {
  const auto nig = GibbsModel::nig(1.0);
  const PartitionState state({3, 2, 1});
  SamplerOptions one;
  SamplerOptions four;
  four.threads = 4;
  const auto a = mc_discovery(nig, state, 12, 5000, 77, one);
  const auto b = mc_discovery(nig, state, 12, 5000, 77, four);
  const auto c = mc_discovery(nig, state, 12, 5000, 77, one);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
  CHECK(a.mean == c.mean);
  CHECK(a.seed == 77);
  CHECK(a.reps == 5000);
  CHECK(mc_alpha_diversity(nig, 100, 300, 4, one) == mc_alpha_diversity(nig, 100, 300, 4, four));
  CHECK(mc_kn_counts(nig, 40, 300, 4, one) == mc_kn_counts(nig, 40, 300, 4, four));
  SamplerOptions exact;
  exact.exact_weights = true;
  exact.threads = 3;
  const auto e = mc_discovery(nig, state, 6, 2000, 8, exact);
  CHECK(std::abs(e.mean - mc_discovery(nig, state, 6, 2000, 8).mean) < 1e-12);
  CHECK_THROWS_AS(mc_discovery(nig, state, 6, 0, 8), DomainError);
}

TEST_CASE("alpha diversity") {
  const auto nig = GibbsModel::nig(1.0);
  for (double v : mc_alpha_diversity(nig, 1, 50, 2)) CHECK(v == 1.0);

  // PD(alpha, 0): K_n / n^alpha -> S with E[S] = 1/Gamma(1+alpha).
  const double alpha = 0.5;
  const auto draws = mc_alpha_diversity(GibbsModel::pd(alpha, 0.0), 2000, 10000, 31);
  const auto est = summarize(draws, 31);
  CHECK(within(est, 1.0 / std::tgamma(1.0 + alpha)));

  // Conditional on (n, k): PD posterior mean of K_m / m^alpha.
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const PartitionState state({5, 3, 1, 1});
  const long m = 1000;
  const auto cond = summarize(mc_alpha_diversity(pd, m, 10000, 32, {}, state), 32);
  const double exact_mean = expected_new_species(pd, 10, 4, m).to_double() / std::sqrt(static_cast<double>(m));
  CHECK(within(cond, exact_mean));
  // (theta/alpha + k)((theta+n+alpha)_m/(theta+n)_m - 1) / m^alpha, whose
  // ratio term tends to Gamma(theta+n)/Gamma(theta+n+alpha) m^alpha.
  const double lead = 1.0 / alpha + 4.0;
  const double limit = lead * std::exp(std::lgamma(11.0) - std::lgamma(11.5));
  CHECK(exact_mean + lead / std::sqrt(static_cast<double>(m)) == doctest::Approx(limit).epsilon(0.01));
}
