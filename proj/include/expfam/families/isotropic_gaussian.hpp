#pragma once

#include <cmath>

#include "expfam/families/univariate_gaussian.hpp"
#include "expfam/family.hpp"

namespace expfam::families {

/// N(mu, I) on R^d. All three parameterizations coincide with mu;
/// t(x) = x and the carrier absorbs the quadratic term.
class IsotropicGaussian final : public Family {
public:
  explicit IsotropicGaussian(int d)
      : Family({.name = "isotropic_gaussian",
                .obs_dim = d,
                .order = d,
                .support = SupportKind::real_line,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"d", static_cast<double>(d)}}}),
        d_(d) {
    if (d < 1) throw DomainError("isotropic_gaussian: d must be >= 1");
  }

  bool in_support(const Observation& x) const override {
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>&) const override { return true; }
  bool in_source_domain(const std::vector<double>&) const override { return true; }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    double acc = 0.0;
    for (int i = 0; i < d_; ++i) acc += (q[i] - p[i]) * (q[i] - p[i]);
    return 0.5 * acc;
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    const double n = static_cast<double>(samples.size());
    std::vector<double> mean(d_, 0.0);
    for (int i = 0; i < d_; ++i) {
      StableSum acc;
      for (const auto& x : samples) acc.add(x[i]);
      mean[i] = acc.value() / n;
    }
    return mean;
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    return -0.5 * (d_ + dot(theta, theta));
  }

  std::vector<ParamField> source_fields() const override { return {{"mu", d_}}; }

protected:
  std::vector<double> t_(const Observation& x) const override { return x; }
  double k_(const Observation& x) const override { return -0.5 * dot(x, x); }

  double F_(const std::vector<double>& th) const override {
    return 0.5 * dot(th, th) + 0.5 * d_ * kLogTwoPi;
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override { return th; }
  std::optional<Matrix> hessF_(const std::vector<double>&) const override {
    return Matrix::identity(static_cast<std::size_t>(d_));
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    return 0.5 * dot(eta, eta) - 0.5 * d_ * kLogTwoPi;
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override { return eta; }

  std::vector<double> to_natural_(const std::vector<double>& l) const override { return l; }
  std::vector<double> to_source_(const std::vector<double>& th) const override { return th; }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return l;
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return eta;
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    Observation x(l);
    for (double& v : x) v += rng.normal();
    return x;
  }

private:
  int d_;
};

}  // namespace expfam::families
