#pragma once

#include <cmath>

#include "expfam/family.hpp"

namespace expfam::families {

/// Rayleigh(sigma^2) on the positive reals. t(x) = x^2,
/// Theta = -1/(2 sigma^2), H = 2 sigma^2, k(x) = log x.
class Rayleigh final : public Family {
public:
  Rayleigh()
      : Family({.name = "rayleigh",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::positive_reals,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] > 0.0 && std::isfinite(x[0]);
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return theta[0] < 0.0;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return eta[0] > 0.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    return std::log(q[0] / p[0]) + (p[0] - q[0]) / q[0];
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum_sq;
    for (const auto& x : samples) sum_sq.add(x[0] * x[0]);
    return std::vector<double>{sum_sq.value() / (2.0 * samples.size())};
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    // E[log X] = (log(2 sigma^2) - euler_gamma) / 2 = (log eta - euler_gamma) / 2.
    constexpr double euler_gamma = 0.57721566490153286061;
    return 0.5 * (std::log(-1.0 / theta[0]) - euler_gamma);
  }

  std::vector<ParamField> source_fields() const override { return {{"sigma2", 1}}; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {x[0] * x[0]}; }
  double k_(const Observation& x) const override { return std::log(x[0]); }

  double F_(const std::vector<double>& th) const override {
    return -std::log(-2.0 * th[0]);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {-1.0 / th[0]};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    Matrix h(1, 1);
    h(0, 0) = 1.0 / (th[0] * th[0]);
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    return -1.0 + std::log(2.0) - std::log(eta[0]);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {-1.0 / eta[0]};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {-1.0 / (2.0 * l[0])};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {-1.0 / (2.0 * th[0])};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {2.0 * l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {0.5 * eta[0]};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {std::sqrt(2.0 * l[0] * rng.exponential())};
  }
};

}  // namespace expfam::families
