#pragma once

#include <cmath>

#include "expfam/families/univariate_gaussian.hpp"
#include "expfam/family.hpp"

namespace expfam::families {

/// N(mu, sigma^2) with sigma^2 a fixed hyperparameter. Order 1, t(x) = x,
/// nonzero carrier k(x) = -x^2 / (2 sigma^2).
class GaussianFixedVariance final : public Family {
public:
  explicit GaussianFixedVariance(double sigma2)
      : Family({.name = "gaussian_fixed_variance",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::real_line,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"sigma2", sigma2}}}),
        sigma2_(sigma2) {
    if (!(sigma2 > 0.0)) throw DomainError("gaussian_fixed_variance: sigma2 must be > 0");
  }

  bool in_support(const Observation& x) const override { return std::isfinite(x[0]); }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>&) const override { return true; }
  bool in_source_domain(const std::vector<double>&) const override { return true; }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const double dmu = q[0] - p[0];
    return dmu * dmu / (2.0 * sigma2_);
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum;
    for (const auto& x : samples) sum.add(x[0]);
    return std::vector<double>{sum.value() / static_cast<double>(samples.size())};
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    const double mu = sigma2_ * theta[0];
    return -(sigma2_ + mu * mu) / (2.0 * sigma2_);
  }

  std::vector<ParamField> source_fields() const override { return {{"mu", 1}}; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {x[0]}; }
  double k_(const Observation& x) const override {
    return -x[0] * x[0] / (2.0 * sigma2_);
  }

  double F_(const std::vector<double>& th) const override {
    return 0.5 * (sigma2_ * th[0] * th[0] + std::log(2.0 * M_PI * sigma2_));
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {sigma2_ * th[0]};
  }
  std::optional<Matrix> hessF_(const std::vector<double>&) const override {
    Matrix h(1, 1);
    h(0, 0) = sigma2_;
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    return eta[0] * eta[0] / (2.0 * sigma2_) - 0.5 * std::log(2.0 * M_PI * sigma2_);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {eta[0] / sigma2_};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {l[0] / sigma2_};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {th[0] * sigma2_};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0]};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {l[0] + std::sqrt(sigma2_) * rng.normal()};
  }

private:
  double sigma2_;
};

}  // namespace expfam::families
