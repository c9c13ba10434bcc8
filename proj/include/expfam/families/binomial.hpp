#pragma once

#include <cmath>

#include "expfam/families/bernoulli.hpp"
#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Binomial(n, p) with the trial count n fixed. Theta = log(p/(1-p)),
/// F = n log(1 + e^theta) - log n!, H = n p.
class Binomial final : public Family {
public:
  explicit Binomial(long n)
      : Family({.name = "binomial",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::nonneg_integers,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"n", static_cast<double>(n)}}}),
        n_(n) {
    if (n < 1) throw DomainError("binomial: n must be >= 1");
  }

  bool in_support(const Observation& x) const override {
    return x[0] >= 0.0 && x[0] <= static_cast<double>(n_) && std::floor(x[0]) == x[0];
  }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return eta[0] > 0.0 && eta[0] < static_cast<double>(n_);
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0 && lambda[0] < 1.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    return n_ * (p[0] * std::log(p[0] / q[0]) +
                 (1.0 - p[0]) * std::log((1.0 - p[0]) / (1.0 - q[0])));
  }

  // The trial count n and the sample count are distinct here: with N
  // observed counts x_1..x_N of Binomial(n, p), p-hat = sum x_i / (n N).
  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum;
    for (const auto& x : samples) sum.add(x[0]);
    const double p = sum.value() / (static_cast<double>(n_) * samples.size());
    if (!(p > 0.0 && p < 1.0)) {
      throw DataError("binomial: degenerate sample (all counts 0 or all n)");
    }
    return std::vector<double>{p};
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    // Finite support: the expectation is an exact (n+1)-term sum.
    StableSum acc;
    for (long x = 0; x <= n_; ++x) {
      const Observation obs{static_cast<double>(x)};
      const double log_p = dot(t_(obs), theta) - F_(theta) + k_(obs);
      acc.add(std::exp(log_p) * k_(obs));
    }
    return acc.value();
  }

  std::vector<ParamField> source_fields() const override { return {{"p", 1}}; }
  std::optional<long> integer_support_bound() const override { return n_; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {x[0]}; }
  double k_(const Observation& x) const override {
    const auto xi = static_cast<std::int64_t>(x[0]);
    return -(log_factorial(xi) + log_factorial(n_ - xi));
  }

  double F_(const std::vector<double>& th) const override {
    return n_ * detail::softplus(th[0]) - log_factorial(n_);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {n_ * detail::sigmoid(th[0])};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    const double p = detail::sigmoid(th[0]);
    Matrix h(1, 1);
    h(0, 0) = n_ * p * (1.0 - p);
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    const double nd = static_cast<double>(n_);
    return eta[0] * std::log(eta[0]) + (nd - eta[0]) * std::log(nd - eta[0]) -
           nd * std::log(nd) + log_factorial(n_);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {std::log(eta[0] / (static_cast<double>(n_) - eta[0]))};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {std::log(l[0] / (1.0 - l[0]))};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {detail::sigmoid(th[0])};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {static_cast<double>(n_) * l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0] / static_cast<double>(n_)};
  }

  bool in_sampling_domain_(const std::vector<double>& lambda) const override {
    return lambda[0] >= 0.0 && lambda[0] <= 1.0;
  }
  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    long count = 0;
    for (long i = 0; i < n_; ++i) count += rng.uniform01() < l[0] ? 1 : 0;
    return {static_cast<double>(count)};
  }

private:
  long n_;
};

}  // namespace expfam::families
