#pragma once

#include <cmath>

#include "expfam/families/detail.hpp"
#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Dirichlet(alpha_1..alpha_k) on the open simplex. Theta = alpha,
/// t(x) = (log x_1..log x_k), F = sum log Gamma(theta_i) - log Gamma(sum),
/// carrier k(x) = -sum log x_i.
class Dirichlet final : public Family {
public:
  explicit Dirichlet(int k)
      : Family({.name = "dirichlet",
                .obs_dim = k,
                .order = k,
                .support = SupportKind::simplex_interior,
                .has_closed_conjugate = false,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"k", static_cast<double>(k)}}}),
        k_count_(k) {
    if (k < 2) throw DomainError("dirichlet: k must be >= 2");
  }

  bool in_support(const Observation& x) const override {
    double total = 0.0;
    for (double v : x) {
      if (!(v > 0.0)) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= 1e-9;
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    for (double v : theta)
      if (!(v > 0.0)) return false;
    return true;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    double total = 0.0;
    for (double v : eta) {
      if (!(v < 0.0)) return false;
      total += std::exp(v);
    }
    return total < 1.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return in_natural_domain(lambda);
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    double total_p = 0.0, total_q = 0.0;
    for (int i = 0; i < k_count_; ++i) {
      total_p += p[i];
      total_q += q[i];
    }
    double acc = log_gamma(total_p) - log_gamma(total_q);
    const double psi_total = digamma(total_p);
    for (int i = 0; i < k_count_; ++i) {
      acc += log_gamma(q[i]) - log_gamma(p[i]) +
             (p[i] - q[i]) * (digamma(p[i]) - psi_total);
    }
    return acc;
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    std::vector<double> mean_log(static_cast<std::size_t>(k_count_), 0.0);
    for (int i = 0; i < k_count_; ++i) {
      StableSum acc;
      for (const auto& x : samples) acc.add(std::log(x[i]));
      mean_log[i] = acc.value() / static_cast<double>(samples.size());
    }
    return detail::solve_mean_log_system(mean_log, name());
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    // E[-sum log X_i] = -sum (psi(alpha_i) - psi(alpha_0)).
    double total = 0.0;
    for (double v : theta) total += v;
    const double psi_total = digamma(total);
    double acc = 0.0;
    for (double v : theta) acc -= digamma(v) - psi_total;
    return acc;
  }

  std::vector<ParamField> source_fields() const override { return {{"alpha", k_count_}}; }

protected:
  std::vector<double> t_(const Observation& x) const override {
    std::vector<double> t(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) t[i] = std::log(x[i]);
    return t;
  }
  double k_(const Observation& x) const override {
    double acc = 0.0;
    for (double v : x) acc -= std::log(v);
    return acc;
  }

  double F_(const std::vector<double>& th) const override {
    double total = 0.0, acc = 0.0;
    for (double v : th) {
      acc += log_gamma(v);
      total += v;
    }
    return acc - log_gamma(total);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    double total = 0.0;
    for (double v : th) total += v;
    const double psi_total = digamma(total);
    std::vector<double> grad(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) grad[i] = digamma(th[i]) - psi_total;
    return grad;
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    double total = 0.0;
    for (double v : th) total += v;
    const double psi1_total = trigamma(total);
    Matrix h(th.size(), th.size(), -psi1_total);
    for (std::size_t i = 0; i < th.size(); ++i) h(i, i) += trigamma(th[i]);
    return h;
  }

  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return detail::solve_mean_log_system(eta, name());
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override { return l; }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return th;
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return gradF_(l);
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return detail::solve_mean_log_system(eta, name());
  }

  // Normalized Gamma draws; retried if underflow collapses a coordinate.
  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    for (int attempt = 0; attempt < 1000; ++attempt) {
      Observation x(static_cast<std::size_t>(k_count_));
      double total = 0.0;
      for (int i = 0; i < k_count_; ++i) {
        x[i] = detail::standard_gamma(l[i], rng);
        total += x[i];
      }
      if (!(total > 0.0)) continue;
      bool interior = true;
      for (double& v : x) {
        v /= total;
        interior = interior && v > 0.0 && v < 1.0;
      }
      if (interior) return x;
    }
    throw NumericalError(name() + ": sampler kept underflowing (alpha too small)");
  }

private:
  int k_count_;
};

}  // namespace expfam::families
