#pragma once

#include <cmath>
#include <optional>

#include "expfam/family.hpp"
#include "expfam/numerics.hpp"

namespace expfam {

enum class BregmanGenerator { log_normalizer, conjugate };

/// B(p || q) = V(p) - V(q) - <p - q, grad V(q)> for V = F on natural
/// parameters or V = G on expectation parameters.
inline double bregman(const Family& family, const ParamVector& p, const ParamVector& q,
                      BregmanGenerator generator = BregmanGenerator::log_normalizer) {
  if (generator == BregmanGenerator::log_normalizer) {
    detail::require_space(p, Space::natural, "bregman[F]");
    detail::require_space(q, Space::natural, "bregman[F]");
    const auto grad_q = family.grad_log_normalizer(q.values);
    double acc = family.log_normalizer(p.values) - family.log_normalizer(q.values);
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      acc -= (p.values[i] - q.values[i]) * grad_q[i];
    }
    return acc;
  }
  detail::require_space(p, Space::expectation, "bregman[G]");
  detail::require_space(q, Space::expectation, "bregman[G]");
  const auto grad_q = family.grad_conjugate(q.values);
  double acc = family.conjugate(p.values) - family.conjugate(q.values);
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    acc -= (p.values[i] - q.values[i]) * grad_q[i];
  }
  return acc;
}

/// KL(p1 || p2) = B_F(theta2 || theta1). Parameters accepted in any space.
inline double kl(const Family& family, const ParamVector& p1, const ParamVector& p2) {
  const auto theta1 = natural_values(family, p1);
  const auto theta2 = natural_values(family, p2);
  return bregman(family, natural_params(theta2), natural_params(theta1));
}

namespace detail {

// alpha F(th) + (1-alpha) F(th') - F(alpha th + (1-alpha) th'); requires
// the mixed parameter to stay inside the natural domain.
inline double jensen_gap(const Family& family, double alpha,
                         const std::vector<double>& theta1,
                         const std::vector<double>& theta2) {
  std::vector<double> mix(theta1.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    mix[i] = alpha * theta1[i] + (1.0 - alpha) * theta2[i];
  }
  if (!family.in_natural_domain(mix)) {
    throw DomainError(family.name() +
                      ": interpolated natural parameter left the open domain");
  }
  return alpha * family.log_normalizer(theta1) +
         (1.0 - alpha) * family.log_normalizer(theta2) - family.log_normalizer(mix);
}

}  // namespace detail

/// Skew Jensen divergence J_{F,alpha}(p1 : p2), alpha in (0, 1).
inline double skew_jensen(const Family& family, double alpha, const ParamVector& p1,
                          const ParamVector& p2) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("skew_jensen: alpha must lie in (0, 1)");
  }
  return detail::jensen_gap(family, alpha, natural_values(family, p1),
                            natural_values(family, p2));
}

/// Renyi divergence D_alpha = J_{F,alpha} / (1 - alpha); alpha > 1 is
/// accepted only while the extrapolated parameter stays in the domain.
inline double renyi_divergence(const Family& family, double alpha, const ParamVector& p1,
                               const ParamVector& p2) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw DomainError("renyi_divergence: alpha must be positive and != 1");
  }
  return detail::jensen_gap(family, alpha, natural_values(family, p1),
                            natural_values(family, p2)) /
         (1.0 - alpha);
}

/// Tsallis divergence D_alpha^T = (e^{-J_{F,alpha}} - 1) / (alpha - 1).
inline double tsallis_divergence(const Family& family, double alpha, const ParamVector& p1,
                                 const ParamVector& p2) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw DomainError("tsallis_divergence: alpha must be positive and != 1");
  }
  const double gap = detail::jensen_gap(family, alpha, natural_values(family, p1),
                                        natural_values(family, p2));
  return std::expm1(-gap) / (alpha - 1.0);
}

/// Bhattacharyya coefficient e^{-J_{F,1/2}}; symmetric, in (0, 1].
inline double bhattacharyya_coefficient(const Family& family, const ParamVector& p1,
                                        const ParamVector& p2) {
  return std::exp(-detail::jensen_gap(family, 0.5, natural_values(family, p1),
                                      natural_values(family, p2)));
}

/// Hellinger distance sqrt(1 - BC); symmetric, in [0, 1).
inline double hellinger(const Family& family, const ParamVector& p1,
                        const ParamVector& p2) {
  const double bc = bhattacharyya_coefficient(family, p1, p2);
  return std::sqrt(std::max(0.0, 1.0 - bc));
}

/// Monte-Carlo settings for the carrier-measure expectations that lack a
/// closed form (the seed is always explicit).
struct McBudget {
  long n = 100000;
  RngSeed seed;
};

/// A value together with the standard error of its Monte-Carlo part
/// (zero when the computation was fully closed-form).
struct ValueWithError {
  double value = 0.0;
  double std_error = 0.0;
};

namespace detail {

// E_p[k(X)]: closed form when the family has one, Monte Carlo otherwise.
inline ValueWithError carrier_expectation(const Family& family,
                                          const std::vector<double>& theta,
                                          const std::optional<McBudget>& mc) {
  if (const auto closed = family.carrier_mean(theta)) return {*closed, 0.0};
  if (!mc.has_value()) {
    throw DataError(family.name() +
                    ": carrier expectation needs a Monte-Carlo budget with a seed");
  }
  const auto lambda = family.natural_to_source(theta);
  const auto estimate = monte_carlo_expectation(
      [&](Rng& rng) { return family.sample(lambda, 1, rng)[0]; },
      [&](const Observation& x) { return family.carrier_measure(x); }, mc->n, mc->seed);
  return {estimate.mean, estimate.std_error};
}

}  // namespace detail

/// Shannon entropy H(p) = F(theta) - <theta, grad F(theta)> - E_p[k(X)].
inline ValueWithError shannon_entropy(const Family& family, const ParamVector& p,
                                      const std::optional<McBudget>& mc = std::nullopt) {
  const auto theta = natural_values(family, p);
  const auto eta = family.grad_log_normalizer(theta);
  const auto carrier = detail::carrier_expectation(family, theta, mc);
  return {family.log_normalizer(theta) - dot(theta, eta) - carrier.value,
          carrier.std_error};
}

/// Cross entropy H(p1 : p2) = F(theta') - <theta', grad F(theta)> - E_p[k(X)].
inline ValueWithError cross_entropy(const Family& family, const ParamVector& p1,
                                    const ParamVector& p2,
                                    const std::optional<McBudget>& mc = std::nullopt) {
  const auto theta = natural_values(family, p1);
  const auto theta_q = natural_values(family, p2);
  const auto eta = family.grad_log_normalizer(theta);
  const auto carrier = detail::carrier_expectation(family, theta, mc);
  return {family.log_normalizer(theta_q) - dot(theta_q, eta) - carrier.value,
          carrier.std_error};
}

namespace detail {

// E[e^{(alpha-1) k(X)}] with X drawn from the alpha-scaled member
// p(.; alpha theta): integral p^alpha factorizes as
// e^{F(alpha theta) - alpha F(theta)} E_{alpha theta}[e^{(alpha-1) k(X)}].
inline ValueWithError exp_carrier_moment(const Family& family,
                                         const std::vector<double>& scaled_theta,
                                         double alpha,
                                         const std::optional<McBudget>& mc) {
  if (family.descriptor().carrier_is_zero) return {1.0, 0.0};
  if (!mc.has_value()) {
    throw DataError(family.name() +
                    ": carrier moment needs a Monte-Carlo budget with a seed");
  }
  const auto lambda = family.natural_to_source(scaled_theta);
  const auto estimate = monte_carlo_expectation(
      [&](Rng& rng) { return family.sample(lambda, 1, rng)[0]; },
      [&](const Observation& x) {
        return std::exp((alpha - 1.0) * family.carrier_measure(x));
      },
      mc->n, mc->seed);
  return {estimate.mean, estimate.std_error};
}

}  // namespace detail

/// Renyi entropy (F(alpha theta) - alpha F(theta) + log E_p[e^{(alpha-1)k}])
/// / (1 - alpha).
inline ValueWithError renyi_entropy(const Family& family, double alpha,
                                    const ParamVector& p,
                                    const std::optional<McBudget>& mc = std::nullopt) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw DomainError("renyi_entropy: alpha must be positive and != 1");
  }
  const auto theta = natural_values(family, p);
  std::vector<double> scaled(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) scaled[i] = alpha * theta[i];
  if (!family.in_natural_domain(scaled)) {
    throw DomainError(family.name() + ": alpha * theta left the natural domain");
  }
  const auto moment = detail::exp_carrier_moment(family, scaled, alpha, mc);
  const double value = (family.log_normalizer(scaled) -
                        alpha * family.log_normalizer(theta) + std::log(moment.value)) /
                       (1.0 - alpha);
  const double err = moment.value > 0.0
                         ? moment.std_error / (moment.value * std::abs(1.0 - alpha))
                         : 0.0;
  return {value, err};
}

/// Tsallis entropy (e^{F(alpha theta) - alpha F(theta)} E_p[e^{(alpha-1)k}]
/// - 1) / (1 - alpha).
inline ValueWithError tsallis_entropy(const Family& family, double alpha,
                                      const ParamVector& p,
                                      const std::optional<McBudget>& mc = std::nullopt) {
  if (!(alpha > 0.0) || alpha == 1.0) {
    throw DomainError("tsallis_entropy: alpha must be positive and != 1");
  }
  const auto theta = natural_values(family, p);
  std::vector<double> scaled(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) scaled[i] = alpha * theta[i];
  if (!family.in_natural_domain(scaled)) {
    throw DomainError(family.name() + ": alpha * theta left the natural domain");
  }
  const auto moment = detail::exp_carrier_moment(family, scaled, alpha, mc);
  const double factor =
      std::exp(family.log_normalizer(scaled) - alpha * family.log_normalizer(theta));
  return {(factor * moment.value - 1.0) / (1.0 - alpha),
          factor * moment.std_error / std::abs(1.0 - alpha)};
}

/// Unnormalized Jeffreys prior sqrt(det grad^2 F(theta)).
inline double jeffreys_prior_unnormalized(const Family& family, const ParamVector& theta) {
  const Matrix fisher = fisher_information_natural(family, theta);
  return std::sqrt(determinant(fisher));
}

}  // namespace expfam
