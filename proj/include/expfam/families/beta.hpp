#pragma once

#include <cmath>

#include "expfam/families/detail.hpp"
#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Beta(alpha, beta) on the open unit interval. t(x) = (log x, log(1-x)),
/// Theta = (alpha - 1, beta - 1), F = log B(theta_1 + 1, theta_2 + 1),
/// H = (psi(alpha) - psi(alpha+beta), psi(beta) - psi(alpha+beta)).
class Beta final : public Family {
public:
  Beta()
      : Family({.name = "beta",
                .obs_dim = 1,
                .order = 2,
                .support = SupportKind::unit_interval,
                .has_closed_conjugate = false,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] > 0.0 && x[0] < 1.0;
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return theta[0] > -1.0 && theta[1] > -1.0;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    // Necessary conditions; the digamma-system solve reports the rest.
    return eta[0] < 0.0 && eta[1] < 0.0 && std::exp(eta[0]) + std::exp(eta[1]) < 1.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0 && lambda[1] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const double ap = p[0], bp = p[1], aq = q[0], bq = q[1];
    return log_beta(aq, bq) - log_beta(ap, bp) + (ap - aq) * digamma(ap) +
           (bp - bq) * digamma(bp) + (aq - ap + bq - bp) * digamma(ap + bp);
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum_log, sum_log1m;
    for (const auto& x : samples) {
      sum_log.add(std::log(x[0]));
      sum_log1m.add(std::log(1.0 - x[0]));
    }
    const double n = static_cast<double>(samples.size());
    return detail::solve_mean_log_system({sum_log.value() / n, sum_log1m.value() / n},
                                         name());
  }

  std::vector<ParamField> source_fields() const override {
    return {{"alpha", 1}, {"beta", 1}};
  }

protected:
  std::vector<double> t_(const Observation& x) const override {
    return {std::log(x[0]), std::log(1.0 - x[0])};
  }
  double k_(const Observation&) const override { return 0.0; }

  double F_(const std::vector<double>& th) const override {
    return log_beta(th[0] + 1.0, th[1] + 1.0);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    const double psi_total = digamma(th[0] + th[1] + 2.0);
    return {digamma(th[0] + 1.0) - psi_total, digamma(th[1] + 1.0) - psi_total};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    const double psi1_total = trigamma(th[0] + th[1] + 2.0);
    Matrix h(2, 2);
    h(0, 0) = trigamma(th[0] + 1.0) - psi1_total;
    h(0, 1) = h(1, 0) = -psi1_total;
    h(1, 1) = trigamma(th[1] + 1.0) - psi1_total;
    return h;
  }

  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    const std::vector<double> ab = detail::solve_mean_log_system(eta, name());
    return {ab[0] - 1.0, ab[1] - 1.0};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {l[0] - 1.0, l[1] - 1.0};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {th[0] + 1.0, th[1] + 1.0};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    const double psi_total = digamma(l[0] + l[1]);
    return {digamma(l[0]) - psi_total, digamma(l[1]) - psi_total};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return detail::solve_mean_log_system(eta, name());
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    while (true) {
      const double g1 = detail::standard_gamma(l[0], rng);
      const double g2 = detail::standard_gamma(l[1], rng);
      const double x = g1 / (g1 + g2);
      if (x > 0.0 && x < 1.0) return {x};
    }
  }
};

}  // namespace expfam::families
