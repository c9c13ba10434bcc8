#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "expfam/family.hpp"
#include "expfam/linalg.hpp"
#include "expfam/numerics.hpp"

namespace expfam {

/// Maximum-likelihood estimate: the observed point (mean of sufficient
/// statistics) in expectation coordinates and its natural-space image.
struct MleResult {
  ParamVector eta;    // observed point, expectation space
  ParamVector theta;  // grad G of the observed point, natural space
};

/// eta-hat = mean of t(x_i) in fixed summation order; the estimate must
/// land strictly inside the open expectation domain, otherwise the data
/// are degenerate (e.g. all samples equal for a Gaussian).
inline MleResult mle(const Family& family, std::span<const Observation> samples) {
  if (samples.empty()) throw DataError(family.name() + ": mle needs at least one sample");
  const std::size_t order = static_cast<std::size_t>(family.order());
  std::vector<StableSum> sums(order);
  for (const auto& x : samples) {
    const auto t = family.sufficient_statistic(x);
    for (std::size_t i = 0; i < order; ++i) sums[i].add(t[i]);
  }
  std::vector<double> eta(order);
  for (std::size_t i = 0; i < order; ++i) {
    eta[i] = sums[i].value() / static_cast<double>(samples.size());
  }
  if (!family.in_expectation_domain(eta)) {
    throw DataError(family.name() +
                    ": degenerate data, observed point on the expectation-domain "
                    "boundary");
  }
  return MleResult{expectation_params(eta), natural_params(family.grad_conjugate(eta))};
}

/// Cramer-Rao lower bound on the covariance of an unbiased estimator of
/// theta from n i.i.d. samples: I(theta)^{-1} / n.
inline Matrix cramer_rao_bound(const Family& family, const ParamVector& theta, long n) {
  if (n < 1) throw DataError("cramer_rao_bound: n must be >= 1");
  const Matrix fisher = fisher_information_natural(family, theta);
  Matrix bound = inverse(fisher);
  for (double& v : bound.data()) v /= static_cast<double>(n);
  return bound;
}

/// Log of the unnormalized conjugate-prior kernel exp(<theta, g> - v F(theta)).
inline double conjugate_prior_log_unnormalized(const Family& family,
                                               const ParamVector& theta,
                                               const std::vector<double>& g, double v) {
  detail::require_space(theta, Space::natural, "conjugate_prior_log_unnormalized");
  if (g.size() != theta.values.size()) {
    throw DomainError("conjugate_prior_log_unnormalized: g has wrong length");
  }
  return dot(theta.values, g) - v * family.log_normalizer(theta.values);
}

/// Conjugate-prior hyperparameters after observing `samples`:
/// g' = g + sum t(x_i), v' = v + n.
inline std::pair<std::vector<double>, double> posterior_update(
    std::vector<double> g, double v, const Family& family,
    std::span<const Observation> samples) {
  if (g.size() != static_cast<std::size_t>(family.order())) {
    throw DomainError("posterior_update: g has wrong length");
  }
  std::vector<StableSum> sums(g.size());
  for (const auto& x : samples) {
    const auto t = family.sufficient_statistic(x);
    for (std::size_t i = 0; i < g.size(); ++i) sums[i].add(t[i]);
  }
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += sums[i].value();
  return {std::move(g), v + static_cast<double>(samples.size())};
}

}  // namespace expfam
