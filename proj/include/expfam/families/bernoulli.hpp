#pragma once

#include <cmath>

#include "expfam/family.hpp"

namespace expfam::families {

namespace detail {

inline double softplus(double x) {
  // log(1 + e^x) without overflow for |x| up to ~700.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

/// Bernoulli(p) on {0, 1}. Theta = log(p / (1-p)), F = log(1 + e^theta),
/// H = p.
class Bernoulli final : public Family {
public:
  Bernoulli()
      : Family({.name = "bernoulli",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::nonneg_integers,
                .has_closed_conjugate = true,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] == 0.0 || x[0] == 1.0;
  }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return eta[0] > 0.0 && eta[0] < 1.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0 && lambda[0] < 1.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    return p[0] * std::log(p[0] / q[0]) +
           (1.0 - p[0]) * std::log((1.0 - p[0]) / (1.0 - q[0]));
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum;
    for (const auto& x : samples) sum.add(x[0]);
    const double mean = sum.value() / static_cast<double>(samples.size());
    if (!(mean > 0.0 && mean < 1.0)) {
      throw DataError("bernoulli: degenerate sample (all outcomes equal)");
    }
    return std::vector<double>{mean};
  }

  std::vector<ParamField> source_fields() const override { return {{"p", 1}}; }
  std::optional<long> integer_support_bound() const override { return 1; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {x[0]}; }
  double k_(const Observation&) const override { return 0.0; }

  double F_(const std::vector<double>& th) const override {
    return detail::softplus(th[0]);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {detail::sigmoid(th[0])};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    const double p = detail::sigmoid(th[0]);
    Matrix h(1, 1);
    h(0, 0) = p * (1.0 - p);
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    const double p = eta[0];
    return p * std::log(p) + (1.0 - p) * std::log(1.0 - p);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {std::log(eta[0] / (1.0 - eta[0]))};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {std::log(l[0] / (1.0 - l[0]))};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {detail::sigmoid(th[0])};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0]};
  }

  // Boundary p in {0, 1} is a legal degenerate limit for sampling.
  bool in_sampling_domain_(const std::vector<double>& lambda) const override {
    return lambda[0] >= 0.0 && lambda[0] <= 1.0;
  }
  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {rng.uniform01() < l[0] ? 1.0 : 0.0};
  }
};

}  // namespace expfam::families
