#pragma once

#include <cmath>

#include "expfam/families/detail.hpp"
#include "expfam/family.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families {

/// Gamma with scale lambda and shape k. Source (lambda, k),
/// t(x) = (x, log x), Theta = (-1/lambda, k - 1),
/// H = (k lambda, psi(k) + log lambda).
///
/// The flash card prints t in the order (x, log x) but pairs theta_1 with
/// the shape; the card's orderings are mutually inconsistent, so t's order
/// is kept and Theta is arranged to match it.
class Gamma final : public Family {
public:
  Gamma()
      : Family({.name = "gamma",
                .obs_dim = 1,
                .order = 2,
                .support = SupportKind::positive_reals,
                .has_closed_conjugate = false,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override {
    return x[0] > 0.0 && std::isfinite(x[0]);
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return theta[0] < 0.0 && theta[1] > -1.0;
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    // E[log X] < log E[X] strictly (Jensen); the map is onto this set.
    return eta[0] > 0.0 && std::log(eta[0]) - eta[1] > 0.0;
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return lambda[0] > 0.0 && lambda[1] > 0.0;
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const double scale_p = p[0], shape_p = p[1];
    const double scale_q = q[0], shape_q = q[1];
    return log_gamma(shape_q) - log_gamma(shape_p) +
           (shape_p - shape_q) * digamma(shape_p) +
           shape_q * std::log(scale_q / scale_p) +
           shape_p * (scale_p - scale_q) / scale_q;
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    StableSum sum, sum_log;
    for (const auto& x : samples) {
      sum.add(x[0]);
      sum_log.add(std::log(x[0]));
    }
    const double n = static_cast<double>(samples.size());
    const double mean = sum.value() / n;
    const double s = std::log(mean) - sum_log.value() / n;
    if (!(s > 0.0)) throw DataError("gamma: degenerate sample (zero spread)");
    const double shape = detail::solve_gamma_shape(s, name());
    return std::vector<double>{mean / shape, shape};
  }

  std::vector<ParamField> source_fields() const override {
    return {{"lambda", 1}, {"k", 1}};
  }

protected:
  std::vector<double> t_(const Observation& x) const override {
    return {x[0], std::log(x[0])};
  }
  double k_(const Observation&) const override { return 0.0; }

  double F_(const std::vector<double>& th) const override {
    return log_gamma(th[1] + 1.0) - (th[1] + 1.0) * std::log(-th[0]);
  }
  std::vector<double> gradF_(const std::vector<double>& th) const override {
    return {-(th[1] + 1.0) / th[0], digamma(th[1] + 1.0) - std::log(-th[0])};
  }
  std::optional<Matrix> hessF_(const std::vector<double>& th) const override {
    Matrix h(2, 2);
    h(0, 0) = (th[1] + 1.0) / (th[0] * th[0]);
    h(0, 1) = h(1, 0) = -1.0 / th[0];
    h(1, 1) = trigamma(th[1] + 1.0);
    return h;
  }

  // No closed conjugate: grad G solves ln k - psi(k) = ln eta_1 - eta_2.
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    const double s = std::log(eta[0]) - eta[1];
    const double shape = detail::solve_gamma_shape(s, name());
    const double scale = eta[0] / shape;
    return {-1.0 / scale, shape - 1.0};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {-1.0 / l[0], l[1] - 1.0};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {-1.0 / th[0], th[1] + 1.0};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[1] * l[0], digamma(l[1]) + std::log(l[0])};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    const double s = std::log(eta[0]) - eta[1];
    const double shape = detail::solve_gamma_shape(s, name());
    return {eta[0] / shape, shape};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    return {l[0] * detail::standard_gamma(l[1], rng)};
  }
};

}  // namespace expfam::families
