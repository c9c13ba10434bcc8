#pragma once

#include <cmath>

#include "expfam/family.hpp"

namespace expfam::families {

/// Laplace(0, sigma) on the real line. t(x) = |x|, Theta = -1/sigma,
/// H = sigma (the mean absolute deviation).
class CenteredLaplacian final : public Family {
public:
  CenteredLaplacian()
      : Family({.name = "centered_laplacian",
                .obs_dim = 1,
                .order = 1,
                .support = SupportKind::real_line,
                .has_closed_conjugate = true,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true}) {}

  bool in_support(const Observation& x) const override { return std::isfinite(x[0]); }
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
    StableSum sum;
    for (const auto& x : samples) sum.add(std::abs(x[0]));
    const double mean_abs = sum.value() / static_cast<double>(samples.size());
    if (!(mean_abs > 0.0)) throw DataError("centered_laplacian: degenerate sample");
    return std::vector<double>{mean_abs};
  }

  std::vector<ParamField> source_fields() const override { return {{"sigma", 1}}; }

protected:
  std::vector<double> t_(const Observation& x) const override { return {std::abs(x[0])}; }
  double k_(const Observation&) const override { return 0.0; }

  double F_(const std::vector<double>& th) const override {
    return std::log(-2.0 / th[0]);
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
    return -1.0 - std::log(2.0) - std::log(eta[0]);
  }
  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    return {-1.0 / eta[0]};
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    return {-1.0 / l[0]};
  }
  std::vector<double> to_source_(const std::vector<double>& th) const override {
    return {-1.0 / th[0]};
  }
  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    return {l[0]};
  }
  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    return {eta[0]};
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    const double magnitude = l[0] * rng.exponential();
    return {rng.uniform01() < 0.5 ? -magnitude : magnitude};
  }
};

}  // namespace expfam::families
