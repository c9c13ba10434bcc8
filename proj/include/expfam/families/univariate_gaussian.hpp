#pragma once

#include <cmath>

#include "expfam/family.hpp"

namespace expfam::families {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

/// N(mu, sigma^2) on the real line. Source (mu, sigma^2),
/// t(x) = (x, x^2), Theta = (mu/sigma^2, -1/(2 sigma^2)),
/// H = (mu, sigma^2 + mu^2).
class UnivariateGaussian final : public Family {
public:
  UnivariateGaussian()
      : Family({.name = "univariate_gaussian",
                .obs_dim = 1,
                .order = 2,
                .support = SupportKind::real_line,
                .has_closed_conjugate = true,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override { return std::isfinite(x[0]); }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return theta[1] < 0.0;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return eta[1] - eta[0] * eta[0] > 0.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[1] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const double dmu = q[0] - p[0];
    return 0.5 * (std::log(q[1] / p[1]) + p[1] / q[1] + dmu * dmu / q[1] - 1.0);
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum, sum_sq;
    for (const auto& x : samples) {
      sum.add(x[0]);
      sum_sq.add(x[0] * x[0]);
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    const double variance = sum_sq.value() / n - mean * mean;
    if (!(variance > 0.0)) {
      throw DataError("univariate_gaussian: degenerate sample (zero variance)");
    }
    return std::vector<double>{mean, variance};
  }

  std::vector<ParamField> source_fields() const override {
    return {{"mu", 1}, {"sigma2", 1}};
  }

protected:
  std::vector<double> t_(const Observation& x) const override {
    return {x[0], x[0] * x[0]};
  }
  double k_(const Observation&) const override { return 0.0; }

  double F_(const std::vector<double>& th) const override {
    return -th[0] * th[0] / (4.0 * th[1]) + 0.5 * std::log(-M_PI / th[1]);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    const double mean = -th[0] / (2.0 * th[1]);
    return {mean, -1.0 / (2.0 * th[1]) + mean * mean};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    Matrix h(2, 2);
    h(0, 0) = -1.0 / (2.0 * th[1]);
    h(0, 1) = h(1, 0) = th[0] / (2.0 * th[1] * th[1]);
    h(1, 1) = 1.0 / (2.0 * th[1] * th[1]) - th[0] * th[0] / (2.0 * th[1] * th[1] * th[1]);
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    const double variance = eta[1] - eta[0] * eta[0];
    return -0.5 * std::log(variance) - 0.5 * (1.0 + kLogTwoPi);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    const double variance = eta[1] - eta[0] * eta[0];
    return {eta[0] / variance, -1.0 / (2.0 * variance)};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {l[0] / l[1], -1.0 / (2.0 * l[1])};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {-th[0] / (2.0 * th[1]), -1.0 / (2.0 * th[1])};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[0], l[1] + l[0] * l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0], eta[1] - eta[0] * eta[0]};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {l[0] + std::sqrt(l[1]) * rng.normal()};
  }
};

}  // namespace expfam::families
