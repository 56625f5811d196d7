#include "doctest.h"

#include <cmath>

#include "gibbs/errors.hpp"
#include "gibbs/posterior.hpp"
#include "gibbs/special_fn.hpp"
#include "gibbs/stirling.hpp"

using namespace gibbs;

namespace {

double rel(const XReal& a, const XReal& b) { return rel_diff(a, b).to_double(); }

XReal pd_ratio_closed(double alpha, double theta, long n, long k, long m, long k_star, Precision p) {
  const XReal a(alpha, p);
  const XReal th(theta, p);
  return gen_rising_factorial(th + a * k, k_star, a) / rising_factorial(th + n, m);
}

XReal sum_all_outcomes(const GibbsModel& model, long n, long k, long m) {
  XReal total(Precision(160));
  OutcomeEnumerator it(m);
  while (auto o = it.next()) total += joint_continuation_pmf(model, n, k, m, *o);
  return total;
}

}  // namespace

TEST_CASE("outcome enumeration order and counts") {
  const auto all = enumerate_outcomes(3);
  // 1 + 1 + 2 + 4 compositions of 0..3
  REQUIRE(all.size() == 8);
  CHECK(all[0] == ContinuationOutcome{0, 0, {}});
  CHECK(all[1] == ContinuationOutcome{1, 1, {1}});
  CHECK(all[2] == ContinuationOutcome{2, 2, {1, 1}});
  CHECK(all[3] == ContinuationOutcome{1, 2, {2}});
  CHECK(all[4] == ContinuationOutcome{3, 3, {1, 1, 1}});
  CHECK(all[5] == ContinuationOutcome{2, 3, {1, 2}});
  CHECK(all[6] == ContinuationOutcome{2, 3, {2, 1}});
  CHECK(all[7] == ContinuationOutcome{1, 3, {3}});
  for (long m = 0; m <= 8; ++m) {
    const auto outcomes = enumerate_outcomes(m);
    CHECK(outcomes.size() == (size_t{1} << m));
    for (const auto& o : outcomes) CHECK(o.valid_for(m));
  }
  CHECK(enumerate_outcomes(0).size() == 1);
  CHECK_FALSE((ContinuationOutcome{1, 2, {1}}).valid_for(3));
  CHECK_FALSE((ContinuationOutcome{1, 4, {4}}).valid_for(3));
  CHECK_FALSE((ContinuationOutcome{2, 2, {2, 0}}).valid_for(3));
}

TEST_CASE("posterior ratio") {
  const auto pd = GibbsModel::pd(0.5, 1.0);
  CHECK(posterior_ratio_exact(pd, 5, 2, 0, 0) == 1.0);
  CHECK(posterior_ratio_exact(GibbsModel::nig(1.0), 5, 2, 0, 0) == 1.0);
  CHECK_THROWS_AS(posterior_ratio_exact(pd, 5, 2, 2, 3), DomainError);

  for (double alpha : {0.25, 0.5, 0.8}) {
    for (double theta : {-0.2, 1.0, 7.5}) {
      const auto model = GibbsModel::pd(alpha, theta);
      for (long m : {1L, 4L, 11L}) {
        for (long ks : {0L, 1L, m}) {
          const XReal exact = posterior_ratio_exact(model, 9, 3, m, ks);
          CHECK(rel(exact, pd_ratio_closed(alpha, theta, 9, 3, m, ks, Precision(192))) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("NGG posterior ratio against the incomplete Gamma form") {
  const double alpha = 0.5;
  const double beta = 1.0;
  const long n = 3, k = 2, m = 2, ks = 1;
  const Precision p(512);
  const XReal a(alpha, p);
  const XReal b(beta, p);
  auto sum = [&](long top, long kk) {
    XReal s(p);
    for (long i = 0; i <= top; ++i) {
      XReal term = binomial(top, i, p) * pow(b, XReal(i, p) / a) * upper_incomplete_gamma(kk - XReal(i, p) / a, b, p);
      s += (i % 2 == 0) ? term : -term;
    }
    return s;
  };
  const XReal direct = pow(a, ks) * sum(n + m - 1, k + ks) / (rising_factorial(XReal(n, p), m) * sum(n - 1, k));
  const XReal generic = posterior_ratio_exact(GibbsModel::ngg(alpha, beta, Precision(256)), n, k, m, ks);
  CHECK(rel(generic, direct) < 1e-60);
}

TEST_CASE("joint continuation pmf normalizes over every outcome") {
  const std::vector<GibbsModel> models = {GibbsModel::pd(0.5, 1.0), GibbsModel::pd(0.3, -0.1), GibbsModel::nig(1.0),
                                          GibbsModel::ngg(0.7, 2.0)};
  for (const auto& model : models) {
    const double tol = model.family() == Family::pd ? 1e-10 : 1e-8;
    for (long n = 1; n <= 6; ++n) {
      for (long k = 1; k <= n; ++k) {
        for (long m = 0; m <= 4; ++m) {
          CAPTURE(model.spec());
          CAPTURE(n);
          CAPTURE(k);
          CAPTURE(m);
          CHECK(std::abs(sum_all_outcomes(model, n, k, m).to_double() - 1.0) < tol);
        }
      }
    }
  }
}

TEST_CASE("joint pmf divides by k*! rather than k!") {
  // With k! the sum over outcomes is off whenever k* ranges past 1 and k != k*.
  const auto model = GibbsModel::pd(0.5, 1.0);
  const long n = 4, k = 2, m = 3;
  XReal printed(Precision(160));
  for (const auto& o : enumerate_outcomes(m)) {
    XReal v = joint_continuation_pmf(model, n, k, m, o);
    v *= exp(lgamma_positive(XReal(o.k_star + 1, Precision(160))) - lgamma_positive(XReal(k + 1, Precision(160))));
    printed += v;
  }
  CHECK(std::abs(sum_all_outcomes(model, n, k, m).to_double() - 1.0) < 1e-12);
  CHECK(std::abs(printed.to_double() - 1.0) > 0.05);
}

TEST_CASE("joint pmf special cases") {
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::nig(1.0)}) {
    const long n = 5, k = 3;
    const XReal r = NoncentralParams(model.alpha(), n, k).shift(Precision(160));
    const XReal stay = joint_continuation_pmf(model, n, k, 1, ContinuationOutcome{0, 0, {}});
    CHECK(rel(stay, posterior_ratio_exact(model.with_precision(Precision(160)), n, k, 1, 0) * r) < 1e-30);
    const XReal fresh = joint_continuation_pmf(model, n, k, 1, ContinuationOutcome{1, 1, {1}});
    CHECK(rel(fresh, predictive(model, PartitionState::counts_only(n, k)).p_new) < 1e-30);
    CHECK_THROWS_AS(joint_continuation_pmf(model, n, k, 2, ContinuationOutcome{1, 3, {3}}), DomainError);
  }
}

TEST_CASE("joint pmf marginal over sizes matches the K_m pmf") {
  const auto model = GibbsModel::nig(0.7);
  const long n = 6, k = 2, m = 5;
  std::vector<XReal> marginal(m + 1, XReal(Precision(160)));
  for (const auto& o : enumerate_outcomes(m)) marginal[static_cast<size_t>(o.k_star)] += joint_continuation_pmf(model, n, k, m, o);
  const auto pmf = posterior_km_distribution(model, n, k, m);
  for (long ks = 0; ks <= m; ++ks) CHECK(rel(marginal[static_cast<size_t>(ks)], pmf[static_cast<size_t>(ks)]) < 1e-25);
}

TEST_CASE("posterior K_m pmf") {
  const std::vector<GibbsModel> models = {GibbsModel::pd(0.5, 1.0), GibbsModel::pd(0.25, 2.0), GibbsModel::nig(1.0),
                                          GibbsModel::ngg(0.75, 0.5)};
  for (const auto& model : models) {
    for (long m : {1L, 6L, 13L, 25L}) {
      const auto pmf = posterior_km_distribution(model, 5, 2, m);
      XReal total(Precision(160));
      for (const auto& v : pmf) {
        CHECK(v.sign() > 0);
        total += v;
      }
      CAPTURE(model.spec());
      CAPTURE(m);
      CHECK(std::abs(total.to_double() - 1.0) < 1e-9);
    }
    const XReal one_step = predictive(model, PartitionState::counts_only(7, 3)).p_new;
    CHECK(rel(posterior_km_pmf(model, 7, 3, 1, 1), one_step) < 1e-30);
    // k* = 0 uses S(m, 0) = (n - k alpha)_m.
    const XReal r = NoncentralParams(model.alpha(), 7, 3).shift(Precision(160));
    CHECK(rel(posterior_km_pmf(model, 7, 3, 4, 0), posterior_ratio_exact(model, 7, 3, 4, 0) * rising_factorial(r, 4)) <
          1e-30);
  }
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const auto pmf = posterior_km_distribution(pd, 5, 2, 6);
  for (long ks = 0; ks <= 6; ++ks) CHECK(pmf[static_cast<size_t>(ks)] == posterior_km_pmf(pd, 5, 2, 6, ks));
  CHECK_THROWS_AS(posterior_km_pmf(pd, 5, 2, 3, 4), DomainError);
  CHECK_THROWS_AS(posterior_km_pmf(pd, 5, 6, 3, 1), DomainError);
}

TEST_CASE("expected new species") {
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::pd(0.25, 3.0), GibbsModel::nig(1.0),
                            GibbsModel::ngg(0.3, 2.0)}) {
    CHECK(rel(expected_new_species(model, 10, 4, 1), predictive(model, PartitionState::counts_only(10, 4)).p_new) <
          1e-30);
    XReal previous = expected_new_species(model, 10, 4, 0);
    CHECK(previous.is_zero());
    for (long m = 1; m <= 20; ++m) {
      const XReal e = expected_new_species(model, 10, 4, m);
      CHECK(e >= previous);
      CHECK(e <= XReal(m, Precision(64)));
      previous = e;
    }
  }
  // PD closed form: (theta/alpha + k)((theta+n+alpha)_m/(theta+n)_m - 1).
  const double alpha = 0.5, theta = 1.0;
  const long n = 10, k = 4, m = 20;
  const Precision p(160);
  const XReal th(theta, p);
  const XReal closed = (th / alpha + k) * (rising_factorial(th + n + alpha, m) / rising_factorial(th + n, m) - 1L);
  CHECK(rel(expected_new_species(GibbsModel::pd(alpha, theta), n, k, m), closed) < 1e-30);
}

TEST_CASE("discovery probability") {
  for (const auto& model : {GibbsModel::pd(0.5, 1.0), GibbsModel::pd(0.75, 0.0), GibbsModel::nig(1.0),
                            GibbsModel::ngg(0.6, 3.0)}) {
    for (long n : {1L, 5L, 20L}) {
      for (long k : {1L, (n + 1) / 2, n}) {
        CHECK(discovery_exact(model, n, k, 0) == predictive(model, PartitionState::counts_only(n, k)).p_new);
        for (long m : {1L, 7L, 30L}) {
          const XReal d = discovery_exact(model, n, k, m);
          CHECK(d > 0.0);
          CHECK(d < 1.0);
        }
      }
    }
  }
  // PD: the new-block probability after m unobserved draws averages
  // (theta + (k + K_m) alpha)/(theta + n + m).
  const auto pd = GibbsModel::pd(0.5, 1.0);
  const long n = 20, k = 6, m = 10;
  const XReal e = expected_new_species(pd, n, k, m);
  const XReal via_mean = (1.0 + (XReal(k, Precision(128)) + e) * 0.5) / (1.0 + n + m);
  CHECK(rel(discovery_exact(pd, n, k, m), via_mean) < 1e-30);
}
