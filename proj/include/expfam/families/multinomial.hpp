#pragma once

#include <cmath>

#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Multinomial over k categories with n trials fixed. The source vector is
/// the full probability vector (p_1..p_k); the minimal order is k-1 with
/// Theta_i = log(p_i / p_k), t(x) = (x_1..x_{k-1}) and H_i = n p_i.
class Multinomial final : public Family {
public:
  Multinomial(long n, int k)
      : Family({.name = "multinomial",
                .obs_dim = k,
                .order = k - 1,
                .support = SupportKind::count_vector,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"k", static_cast<double>(k)},
                                      {"n", static_cast<double>(n)}}}),
        n_(n),
        k_count_(k) {
    if (n < 1) throw DomainError("multinomial: n must be >= 1");
    if (k < 2) throw DomainError("multinomial: k must be >= 2");
  }

  int param_length(Space space) const override {
    return space == Space::source ? k_count_ : k_count_ - 1;
  }

  bool in_support(const Observation& x) const override {
    double total = 0.0;
    for (double v : x) {
      if (v < 0.0 || std::floor(v) != v) return false;
      total += v;
    }
    return total == static_cast<double>(n_);
  }
  bool in_natural_domain(const std::vector<double>&) const override { return true; }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    double total = 0.0;
    for (double v : eta) {
      if (!(v > 0.0)) return false;
      total += v;
    }
    return total < static_cast<double>(n_);
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    double total = 0.0;
    for (double v : lambda) {
      if (!(v > 0.0)) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= 1e-9;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    StableSum acc;
    for (int i = 0; i < k_count_; ++i) acc.add(p[i] * std::log(p[i] / q[i]));
    return static_cast<double>(n_) * acc.value();
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    std::vector<double> p(static_cast<std::size_t>(k_count_), 0.0);
    const double denom = static_cast<double>(n_) * samples.size();
    for (int i = 0; i < k_count_; ++i) {
      StableSum acc;
      for (const auto& x : samples) acc.add(x[i]);
      p[i] = acc.value() / denom;
      if (!(p[i] > 0.0)) {
        throw DataError("multinomial: degenerate sample (empty category)");
      }
    }
    return p;
  }

  std::optional<double> carrier_mean(const std::vector<double>& theta) const override {
    // Exact enumeration for modest supports, Monte Carlo otherwise.
    double combos = 1.0;
    for (int i = 1; i < k_count_; ++i) combos *= static_cast<double>(n_ + i) / i;
    if (combos > 50000.0) return std::nullopt;
    StableSum acc;
    std::vector<double> x(static_cast<std::size_t>(k_count_), 0.0);
    enumerate(0, n_, x, [&](const Observation& obs) {
      const double log_p = dot(t_(obs), theta) - F_(theta) + k_(obs);
      acc.add(std::exp(log_p) * k_(obs));
    });
    return acc.value();
  }

  std::vector<ParamField> source_fields() const override { return {{"p", k_count_}}; }

protected:
  std::vector<double> t_(const Observation& x) const override {
    return std::vector<double>(x.begin(), x.end() - 1);
  }
  double k_(const Observation& x) const override {
    double acc = 0.0;
    for (double v : x) acc -= log_factorial(static_cast<std::int64_t>(v));
    return acc;
  }

  double F_(const std::vector<double>& th) const override {
    return static_cast<double>(n_) * log_sum_exp_with_zero(th) - log_factorial(n_);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    const double lse = log_sum_exp_with_zero(th);
    std::vector<double> grad(th.size());
    for (std::size_t i = 0; i < th.size(); ++i) {
      grad[i] = static_cast<double>(n_) * std::exp(th[i] - lse);
    }
    return grad;
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    const double lse = log_sum_exp_with_zero(th);
    const std::size_t m = th.size();
    std::vector<double> p(m);
    for (std::size_t i = 0; i < m; ++i) p[i] = std::exp(th[i] - lse);
    Matrix h(m, m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        h(i, j) = static_cast<double>(n_) * ((i == j ? p[i] : 0.0) - p[i] * p[j]);
      }
    return h;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    const double nd = static_cast<double>(n_);
    StableSum acc;
    double total = 0.0;
    for (double v : eta) {
      acc.add(v * std::log(v));
      total += v;
    }
    return acc.value() + (nd - total) * std::log(nd - total) - nd * std::log(nd) +
           log_factorial(n_);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    double total = 0.0;
    for (double v : eta) total += v;
    const double rest = static_cast<double>(n_) - total;
    std::vector<double> theta(eta.size());
    for (std::size_t i = 0; i < eta.size(); ++i) theta[i] = std::log(eta[i] / rest);
    return theta;
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    std::vector<double> theta(static_cast<std::size_t>(k_count_ - 1));
    for (int i = 0; i < k_count_ - 1; ++i) theta[i] = std::log(l[i] / l[k_count_ - 1]);
    return theta;
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    const double lse = log_sum_exp_with_zero(th);
    std::vector<double> p(static_cast<std::size_t>(k_count_));
    for (int i = 0; i < k_count_ - 1; ++i) p[i] = std::exp(th[i] - lse);
    p[k_count_ - 1] = std::exp(-lse);
    return p;
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    std::vector<double> eta(static_cast<std::size_t>(k_count_ - 1));
    for (int i = 0; i < k_count_ - 1; ++i) eta[i] = static_cast<double>(n_) * l[i];
    return eta;
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    std::vector<double> p(static_cast<std::size_t>(k_count_));
    double total = 0.0;
    for (int i = 0; i < k_count_ - 1; ++i) {
      p[i] = eta[i] / static_cast<double>(n_);
      total += p[i];
    }
    p[k_count_ - 1] = 1.0 - total;
    return p;
  }

  bool in_sampling_domain_(const std::vector<double>& lambda) const override {
    double total = 0.0;
    for (double v : lambda) {
      if (v < 0.0) return false;
      total += v;
    }
    return std::abs(total - 1.0) <= 1e-9;
  }

  // Sequential conditional binomials.
  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    Observation x(static_cast<std::size_t>(k_count_), 0.0);
    long remaining = n_;
    double mass = 1.0;
    for (int i = 0; i < k_count_ - 1 && remaining > 0; ++i) {
      const double ratio = std::min(1.0, std::max(0.0, l[i] / mass));
      long count = 0;
      for (long trial = 0; trial < remaining; ++trial) {
        count += rng.uniform01() < ratio ? 1 : 0;
      }
      x[i] = static_cast<double>(count);
      remaining -= count;
      mass -= l[i];
      if (mass <= 0.0) break;
    }
    x[k_count_ - 1] = static_cast<double>(remaining);
    return x;
  }

private:
  static double log_sum_exp_with_zero(const std::vector<double>& th) {
    double top = 0.0;
    for (double v : th) top = std::max(top, v);
    double acc = std::exp(-top);
    for (double v : th) acc += std::exp(v - top);
    return top + std::log(acc);
  }

  template <typename Visit>
  void enumerate(int pos, long remaining, std::vector<double>& x, const Visit& visit) const {
    if (pos == k_count_ - 1) {
      x[pos] = static_cast<double>(remaining);
      visit(x);
      return;
    }
    for (long v = 0; v <= remaining; ++v) {
      x[pos] = static_cast<double>(v);
      enumerate(pos + 1, remaining - v, x, visit);
    }
  }

  long n_;
  int k_count_;
};

}  // namespace expfam::families
