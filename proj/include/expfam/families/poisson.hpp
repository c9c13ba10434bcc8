#pragma once

#include <cmath>

#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Poisson(lambda) on the nonnegative integers. Theta = log lambda,
/// F = exp theta, H = lambda, k(x) = -log x!.
class Poisson final : public Family {
public:
  Poisson()
      : Family({.name = "poisson",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::nonneg_integers,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] >= 0.0 && std::floor(x[0]) == x[0] && std::isfinite(x[0]);
  }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return eta[0] > 0.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    return q[0] - p[0] * (1.0 + std::log(q[0] / p[0]));
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum;
    for (const auto& x : samples) sum.add(x[0]);
    const double mean = sum.value() / static_cast<double>(samples.size());
    if (!(mean > 0.0)) throw DataError("poisson: degenerate sample (all zeros)");
    return std::vector<double>{mean};
  }

  std::vector<ParamField> source_fields() const override { return {{"lambda", 1}}; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {x[0]}; }
  double k_(const Observation& x) const override {
    return -log_factorial(static_cast<std::int64_t>(x[0]));
  }

  double F_(const std::vector<double>& th) const override { return std::exp(th[0]); }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {std::exp(th[0])};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    Matrix h(1, 1);
    h(0, 0) = std::exp(th[0]);
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    return eta[0] * std::log(eta[0]) - eta[0];
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {std::log(eta[0])};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {std::log(l[0])};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {std::exp(th[0])};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0]};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {static_cast<double>(draw(l[0], rng))};
  }

private:
  // Inversion by multiplying uniforms below lambda = 10, Hormann's PTRS
  // transformed rejection above.
  static long draw(double lambda, Rng& rng) {
    if (lambda < 10.0) {
      const double limit = std::exp(-lambda);
      long k = 0;
      double prod = rng.uniform01();
      while (prod > limit) {
        ++k;
        prod *= rng.uniform01();
      }
      return k;
    }
    const double b = 0.931 + 2.53 * std::sqrt(lambda);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    const double log_lambda = std::log(lambda);
    while (true) {
      const double u = rng.uniform01() - 0.5;
      const double v = rng.uniform01();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
      if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
      const double rhs = -lambda + kf * log_lambda - log_gamma(kf + 1.0);
      if (lhs <= rhs) return static_cast<long>(kf);
    }
  }
};

}  // namespace expfam::families
