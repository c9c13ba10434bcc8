#pragma once

#include <cmath>

#include "expfam/family.hpp"

namespace expfam::families {

/// Inverse Gaussian with mean mu and shape lambda. t(x) = (-x, -1/x),
/// Theta = (lambda/(2 mu^2), lambda/2),
/// F = -2 sqrt(theta_1 theta_2) - log(theta_2)/2 + log(pi)/2,
/// H = (-mu, -1/mu - 1/lambda). The card's carrier row x^{-3/2} is the
/// base measure; in log form k(x) = -(3/2) log x.
class InverseGaussian final : public Family {
public:
  InverseGaussian()
      : Family({.name = "inverse_gaussian",
                .obs_dim = 1,
                .order = 2,
                .support = SupportKind::positive_reals,
                .has_closed_conjugate = true,
                .carrier_is_zero = false,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] > 0.0 && std::isfinite(x[0]);
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return theta[0] > 0.0 && theta[1] > 0.0;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    // eta_2 = 1/eta_1 - 1/lambda with lambda > 0.
    return eta[0] < 0.0 && eta[1] < 1.0 / eta[0];
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0 && lambda[1] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const double mu_p = p[0], sh_p = p[1], mu_q = q[0], sh_q = q[1];
    const double dmu = mu_p - mu_q;
    return 0.5 * std::log(sh_p / sh_q) + sh_q * dmu * dmu / (2.0 * mu_q * mu_q * mu_p) +
           sh_q / (2.0 * sh_p) - 0.5;
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum, sum_inv;
    for (const auto& x : samples) {
      sum.add(x[0]);
      sum_inv.add(1.0 / x[0]);
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    const double inv_shape = sum_inv.value() / n - 1.0 / mean;
    if (!(inv_shape > 0.0)) throw DataError("inverse_gaussian: degenerate sample");
    return std::vector<double>{mean, 1.0 / inv_shape};
  }

  std::vector<ParamField> source_fields() const override {
    return {{"mu", 1}, {"lambda", 1}};
  }

protected:
  std::vector<double> t_(const Observation& x) const override {
    return {-x[0], -1.0 / x[0]};
  }
  double k_(const Observation& x) const override { return -1.5 * std::log(x[0]); }

  double F_(const std::vector<double>& th) const override {
    return -2.0 * std::sqrt(th[0] * th[1]) - 0.5 * std::log(th[1]) + 0.5 * std::log(M_PI);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {-std::sqrt(th[1] / th[0]), -std::sqrt(th[0] / th[1]) - 0.5 / th[1]};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    const double root = std::sqrt(th[0] * th[1]);
    Matrix h(2, 2);
    h(0, 0) = 0.5 * std::sqrt(th[1]) / (th[0] * std::sqrt(th[0]));
    h(0, 1) = h(1, 0) = -0.5 / root;
    h(1, 1) = 0.5 * std::sqrt(th[0]) / (th[1] * std::sqrt(th[1])) +
              0.5 / (th[1] * th[1]);
    return h;
  }

  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    const double mu = -eta[0];
    const double shape = 1.0 / (1.0 / eta[0] - eta[1]);
    return {shape / (2.0 * mu * mu), 0.5 * shape};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {l[1] / (2.0 * l[0] * l[0]), 0.5 * l[1]};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    const double shape = 2.0 * th[1];
    return {std::sqrt(th[1] / th[0]), shape};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {-l[0], -1.0 / l[0] - 1.0 / l[1]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {-eta[0], 1.0 / (1.0 / eta[0] - eta[1])};
  }

  // Michael-Schucany-Haas transform.
  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    const double mu = l[0], shape = l[1];
    const double z = rng.normal();
    const double y = z * z;
    const double x = mu + mu * mu * y / (2.0 * shape) -
                     mu / (2.0 * shape) * std::sqrt(4.0 * mu * shape * y + mu * mu * y * y);
    const double u = rng.uniform01();
    return {u <= mu / (mu + x) ? x : mu * mu / x};
  }
};

}  // namespace expfam::families
