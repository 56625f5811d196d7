#include "gibbs/posterior.hpp"

#include <bit>
#include <numeric>

#include "gibbs/errors.hpp"
#include "gibbs/special_fn.hpp"
#include "gibbs/stirling.hpp"

namespace gibbs {

namespace {

void require_state(long n, long k, long m) {
  if (n < 1 || k < 1 || k > n) throw DomainError("posterior needs 1 <= k <= n");
  if (m < 0) throw DomainError("posterior needs m >= 0");
}

Precision working(const GibbsModel& model, long m) {
  return model.precision() + 16 + static_cast<long>(std::bit_width(static_cast<unsigned long>(m + 1)));
}

}  // namespace

bool ContinuationOutcome::valid_for(long m) const {
  if (k_star < 0 || l_m < k_star || l_m > m) return false;
  if (static_cast<long>(sizes.size()) != k_star) return false;
  long total = 0;
  for (long s : sizes) {
    if (s < 1) return false;
    total += s;
  }
  return total == l_m;
}

OutcomeEnumerator::OutcomeEnumerator(long m) : m_(m) {
  if (m < 0) throw DomainError("outcome enumeration needs m >= 0");
}

std::optional<ContinuationOutcome> OutcomeEnumerator::next() {
  if (!started_) {
    started_ = true;
  } else if (parts_.size() > 1) {
    const long last = parts_.back();
    parts_.pop_back();
    parts_.back() += 1;
    parts_.insert(parts_.end(), static_cast<size_t>(last - 1), 1L);
  } else {
    if (++l_ > m_) return std::nullopt;
    parts_.assign(static_cast<size_t>(l_), 1L);
  }
  return ContinuationOutcome{static_cast<long>(parts_.size()), l_, parts_};
}

std::vector<ContinuationOutcome> enumerate_outcomes(long m) {
  std::vector<ContinuationOutcome> out;
  OutcomeEnumerator it(m);
  while (auto o = it.next()) out.push_back(std::move(*o));
  return out;
}

XReal posterior_ratio_exact(const GibbsModel& model, long n, long k, long m, long k_star) {
  require_state(n, k, m);
  if (k_star < 0 || k_star > m) throw DomainError("posterior ratio needs 0 <= k* <= m");
  if (m == 0) return XReal(1L, model.precision());
  const auto wm = model.with_precision(working(model, m));
  return (weight(wm, n + m, k + k_star) / weight(wm, n, k)).at(model.precision());
}

XReal joint_continuation_pmf(const GibbsModel& model, long n, long k, long m, const ContinuationOutcome& outcome) {
  require_state(n, k, m);
  if (!outcome.valid_for(m)) throw DomainError("outcome is not a valid continuation of m draws");
  const Precision w = working(model, m);
  const auto wm = model.with_precision(w);
  const long l = outcome.l_m;
  const long ks = outcome.k_star;

  XReal v = weight(wm, n + m, k + ks) / weight(wm, n, k);
  // l! / (prod s_i! k*!)
  XReal multinomial = exp(lgamma_positive(XReal(l + 1, w)) - lgamma_positive(XReal(ks + 1, w)));
  const XReal one_minus_alpha = 1L - XReal(model.alpha(), w);
  for (long s : outcome.sizes) {
    multinomial /= exp(lgamma_positive(XReal(s + 1, w)));
    v *= rising_factorial(one_minus_alpha, s - 1);
  }
  v *= multinomial * binomial(m, l, w);
  v *= rising_factorial(NoncentralParams(model.alpha(), n, k).shift(w), m - l);
  return v.at(model.precision());
}

std::vector<XReal> posterior_km_distribution(const GibbsModel& model, long n, long k, long m) {
  require_state(n, k, m);
  const Precision w = working(model, m);
  const auto wm = model.with_precision(w);
  const std::vector<XReal> row = noncentral_row(m, NoncentralParams(model.alpha(), n, k), w);
  const XReal v = weight(wm, n, k);
  std::vector<XReal> out;
  out.reserve(row.size());
  for (long ks = 0; ks <= m; ++ks) {
    out.push_back((weight(wm, n + m, k + ks) / v * row[static_cast<size_t>(ks)]).at(model.precision()));
  }
  return out;
}

XReal posterior_km_pmf(const GibbsModel& model, long n, long k, long m, long k_star) {
  require_state(n, k, m);
  if (k_star < 0 || k_star > m) throw DomainError("posterior pmf needs 0 <= k* <= m");
  const Precision w = working(model, m);
  const auto wm = model.with_precision(w);
  const std::vector<XReal> row = noncentral_row(m, NoncentralParams(model.alpha(), n, k), w);
  return (weight(wm, n + m, k + k_star) / weight(wm, n, k) * row[static_cast<size_t>(k_star)]).at(model.precision());
}

XReal expected_new_species(const GibbsModel& model, long n, long k, long m) {
  const auto pmf = posterior_km_distribution(model.with_precision(model.precision() + 16), n, k, m);
  XReal total(model.precision() + 16);
  for (long ks = 1; ks <= m; ++ks) total += pmf[static_cast<size_t>(ks)] * ks;
  return total.at(model.precision());
}

XReal discovery_exact(const GibbsModel& model, long n, long k, long m) {
  require_state(n, k, m);
  // A single term with S(0, 0) = 1.
  if (m == 0) return new_block_probability(model, n, k);
  const Precision w = working(model, m);
  const auto wm = model.with_precision(w);
  const std::vector<XReal> row = noncentral_row(m, NoncentralParams(model.alpha(), n, k), w);
  const XReal v = weight(wm, n, k);
  XReal total(w);
  for (long ks = 0; ks <= m; ++ks) total += weight(wm, n + m + 1, k + ks + 1) * row[static_cast<size_t>(ks)];
  return (total / v).at(model.precision());
}

}  // namespace gibbs
