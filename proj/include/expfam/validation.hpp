#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "expfam/family.hpp"
#include "expfam/rng.hpp"

namespace expfam {

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;  // worst measured residual for the check
  double tolerance = 0.0;
};

struct ValidationReport {
  std::string family;
  std::vector<CheckResult> checks;

  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

namespace validation_detail {

inline double span(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

// In-domain source draws used by the self-check suite.
inline std::vector<double> draw_source(const Family& family, Rng& rng) {
  const std::string& name = family.name();
  const int d = family.obs_dim();
  if (name == "univariate_gaussian") return {span(rng, -3, 3), span(rng, 0.3, 4)};
  if (name == "gaussian_fixed_variance") return {span(rng, -5, 5)};
  if (name == "multivariate_gaussian") {
    std::vector<double> lambda(static_cast<std::size_t>(d + d * d));
    for (int i = 0; i < d; ++i) lambda[i] = span(rng, -2, 2);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = span(rng, -1, 1);
    const Matrix cov = a.multiply(a.transposed());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) lambda[d + i * d + j] = cov(i, j) + (i == j ? 0.4 : 0.0);
    return lambda;
  }
  if (name == "isotropic_gaussian") {
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (double& v : mu) v = span(rng, -3, 3);
    return mu;
  }
  if (name == "poisson") return {span(rng, 0.3, 15)};
  if (name == "centered_laplacian") return {span(rng, 0.3, 4)};
  if (name == "bernoulli" || name == "binomial") return {span(rng, 0.05, 0.95)};
  if (name == "multinomial") {
    std::vector<double> p(static_cast<std::size_t>(d));
    double total = 0.0;
    for (double& v : p) {
      v = 0.05 + rng.uniform01();
      total += v;
    }
    for (double& v : p) v /= total;
    return p;
  }
  if (name == "rayleigh") return {span(rng, 0.3, 5)};
  if (name == "gamma") return {span(rng, 0.3, 4), span(rng, 0.5, 8)};
  if (name == "beta") return {span(rng, 0.5, 8), span(rng, 0.5, 8)};
  if (name == "inverse_gaussian") return {span(rng, 0.3, 5), span(rng, 0.3, 6)};
  if (name == "dirichlet") {
    std::vector<double> alpha(static_cast<std::size_t>(d));
    for (double& v : alpha) v = span(rng, 0.5, 8);
    return alpha;
  }
  throw Error("validation: unhandled family " + name);
}

}  // namespace validation_detail

/// Deterministic self-check suite for one family: normalization, Legendre
/// duality, inverse-gradient round trips, gradient-vs-differences and
/// closed-KL-vs-Bregman agreement. When `point` is given it is validated
/// as the first parameter setting.
inline ValidationReport run_validation(const Family& family,
                                       const std::optional<ParamVector>& point = {}) {
  ValidationReport report;
  report.family = family.name();
  Rng rng(RngSeed{0x5eed5eedULL});

  std::vector<std::vector<double>> settings;  // source space
  if (point) settings.push_back(source_values(family, *point));
  while (settings.size() < 3) {
    settings.push_back(validation_detail::draw_source(family, rng));
  }

  {
    CheckResult check{"normalization", true, 0.0, 1e-6};
    for (const auto& lambda : settings) {
      const auto r = verify_normalization(family, source_params(lambda), check.tolerance);
      check.residual = std::max(check.residual, std::abs(r.integral - 1.0));
      check.pass = check.pass && r.ok;
    }
    report.checks.push_back(check);
  }

  const bool closed = family.descriptor().has_closed_conjugate;
  {
    CheckResult duality{"legendre_duality", true, 0.0, 1e-8};
    CheckResult inverse{"inverse_gradients", true, 0.0, closed ? 1e-8 : 1e-7};
    for (int trial = 0; trial < 20; ++trial) {
      const auto lambda = trial < static_cast<int>(settings.size())
                              ? settings[trial]
                              : validation_detail::draw_source(family, rng);
      const auto theta = family.source_to_natural(lambda);
      const auto eta = family.grad_log_normalizer(theta);
      const double gap = family.conjugate(eta) + family.log_normalizer(theta) -
                         dot(theta, eta);
      duality.residual = std::max(duality.residual, std::abs(gap));

      const auto theta_back = family.grad_conjugate(eta);
      for (std::size_t i = 0; i < theta.size(); ++i) {
        inverse.residual =
            std::max(inverse.residual, std::abs(theta_back[i] - theta[i]) /
                                           (1.0 + std::abs(theta[i])));
      }
    }
    duality.pass = duality.residual < duality.tolerance;
    inverse.pass = inverse.residual < inverse.tolerance;
    report.checks.push_back(duality);
    report.checks.push_back(inverse);
  }

  {
    CheckResult gradient{"gradient_vs_differences", true, 0.0, 1e-4};
    for (int trial = 0; trial < 5; ++trial) {
      const auto theta = family.source_to_natural(
          trial < static_cast<int>(settings.size())
              ? settings[trial]
              : validation_detail::draw_source(family, rng));
      const auto grad = family.grad_log_normalizer(theta);
      double scale = 1.0;
      for (double g : grad) scale = std::max(scale, std::abs(g));
      const int d = family.obs_dim();
      const bool mvn = family.name() == "multivariate_gaussian";
      for (std::size_t i = 0; i < theta.size(); ++i) {
        std::vector<std::size_t> idx{i};
        if (mvn && i >= static_cast<std::size_t>(d)) {
          const std::size_t r = (i - d) / d, c = (i - d) % d;
          if (r > c) continue;
          if (r != c) idx.push_back(d + c * d + r);
        }
        const double h = 1e-5 * (1.0 + std::abs(theta[i]));
        std::vector<double> plus = theta, minus = theta;
        double expected = 0.0;
        for (std::size_t j : idx) {
          plus[j] += h;
          minus[j] -= h;
          expected += grad[j];
        }
        const double fd =
            (family.log_normalizer(plus) - family.log_normalizer(minus)) / (2.0 * h);
        gradient.residual = std::max(
            gradient.residual, std::abs(expected - fd) / (scale * idx.size()));
      }
    }
    gradient.pass = gradient.residual < gradient.tolerance;
    report.checks.push_back(gradient);
  }

  {
    CheckResult agreement{"kl_closed_vs_bregman", true, 0.0, 1e-9};
    for (int trial = 0; trial < 10; ++trial) {
      const auto lp = validation_detail::draw_source(family, rng);
      const auto lq = validation_detail::draw_source(family, rng);
      const auto closed_kl = family.kl_closed_form(lp, lq);
      if (!closed_kl) continue;
      const auto tp = family.source_to_natural(lp);
      const auto tq = family.source_to_natural(lq);
      const auto grad_p = family.grad_log_normalizer(tp);
      double bregman = family.log_normalizer(tq) - family.log_normalizer(tp);
      for (std::size_t i = 0; i < tp.size(); ++i) {
        bregman -= (tq[i] - tp[i]) * grad_p[i];
      }
      agreement.residual =
          std::max(agreement.residual,
                   std::abs(*closed_kl - bregman) / (1.0 + std::abs(bregman)));
    }
    agreement.pass = agreement.residual < agreement.tolerance;
    report.checks.push_back(agreement);
  }

  {
    CheckResult round_trip{"conversion_round_trips", true, 0.0, 1e-8};
    const Space spaces[] = {Space::source, Space::natural, Space::expectation};
    for (const auto& lambda : settings) {
      const ParamVector start = source_params(lambda);
      for (Space a : spaces) {
        const auto in_a = convert(family, start, a);
        for (Space b : spaces) {
          const auto back = convert(family, convert(family, in_a, b), a);
          for (std::size_t i = 0; i < in_a.values.size(); ++i) {
            round_trip.residual = std::max(
                round_trip.residual, std::abs(back.values[i] - in_a.values[i]) /
                                         (1.0 + std::abs(in_a.values[i])));
          }
        }
      }
    }
    round_trip.pass = round_trip.residual < round_trip.tolerance;
    report.checks.push_back(round_trip);
  }

  return report;
}

}  // namespace expfam
