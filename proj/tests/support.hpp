#pragma once

// Shared by the unit and acceptance suites: random in-domain parameter
// draws per family, kept in moderate ranges so identity residuals stay
// well-conditioned.

#include <string>
#include <vector>

#include "expfam/catalog.hpp"
#include "expfam/family.hpp"
#include "expfam/rng.hpp"

namespace testsupport {

inline double uniform_in(expfam::Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

inline std::vector<double> random_source_values(const expfam::Family& family,
                                                expfam::Rng& rng) {
  const std::string& name = family.name();
  const int d = family.obs_dim();
  if (name == "univariate_gaussian") {
    return {uniform_in(rng, -3.0, 3.0), uniform_in(rng, 0.3, 4.0)};
  }
  if (name == "gaussian_fixed_variance") {
    return {uniform_in(rng, -5.0, 5.0)};
  }
  if (name == "multivariate_gaussian") {
    std::vector<double> lambda(static_cast<std::size_t>(d + d * d));
    for (int i = 0; i < d; ++i) lambda[i] = uniform_in(rng, -2.0, 2.0);
    expfam::Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = uniform_in(rng, -1.0, 1.0);
    const expfam::Matrix cov = a.multiply(a.transposed());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        lambda[d + i * d + j] = cov(i, j) + (i == j ? 0.4 : 0.0);
      }
    return lambda;
  }
  if (name == "isotropic_gaussian") {
    std::vector<double> mu(static_cast<std::size_t>(d));
    for (double& v : mu) v = uniform_in(rng, -3.0, 3.0);
    return mu;
  }
  if (name == "poisson") return {uniform_in(rng, 0.3, 15.0)};
  if (name == "centered_laplacian") return {uniform_in(rng, 0.3, 4.0)};
  if (name == "bernoulli") return {uniform_in(rng, 0.05, 0.95)};
  if (name == "binomial") return {uniform_in(rng, 0.05, 0.95)};
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
  if (name == "rayleigh") return {uniform_in(rng, 0.3, 5.0)};
  if (name == "gamma") {
    return {uniform_in(rng, 0.3, 4.0), uniform_in(rng, 0.5, 8.0)};
  }
  if (name == "beta") {
    return {uniform_in(rng, 0.5, 8.0), uniform_in(rng, 0.5, 8.0)};
  }
  if (name == "inverse_gaussian") {
    return {uniform_in(rng, 0.3, 5.0), uniform_in(rng, 0.3, 6.0)};
  }
  if (name == "dirichlet") {
    std::vector<double> alpha(static_cast<std::size_t>(d));
    for (double& v : alpha) v = uniform_in(rng, 0.5, 8.0);
    return alpha;
  }
  throw expfam::Error("random_source_values: unhandled family " + name);
}

inline expfam::ParamVector random_source(const expfam::Family& family, expfam::Rng& rng) {
  return expfam::source_params(random_source_values(family, rng));
}

inline expfam::ParamVector random_natural(const expfam::Family& family, expfam::Rng& rng) {
  return expfam::natural_params(
      family.source_to_natural(random_source_values(family, rng)));
}

/// Narrower in-domain draws keeping third derivatives of F moderate, for
/// the local-quadratic checks whose truncation error scales with F'''.
inline expfam::ParamVector random_natural_moderate(const expfam::Family& family,
                                                   expfam::Rng& rng) {
  const std::string& name = family.name();
  const int d = family.obs_dim();
  std::vector<double> lambda;
  if (name == "univariate_gaussian") {
    lambda = {uniform_in(rng, -2.0, 2.0), uniform_in(rng, 0.5, 2.0)};
  } else if (name == "multivariate_gaussian") {
    lambda.assign(static_cast<std::size_t>(d + d * d), 0.0);
    for (int i = 0; i < d; ++i) lambda[i] = uniform_in(rng, -1.0, 1.0);
    expfam::Matrix a(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) a(i, j) = uniform_in(rng, -0.4, 0.4);
    const expfam::Matrix cov = a.multiply(a.transposed());
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        lambda[d + i * d + j] = cov(i, j) + (i == j ? 0.8 : 0.0);
      }
  } else if (name == "poisson") {
    lambda = {uniform_in(rng, 0.5, 8.0)};
  } else if (name == "centered_laplacian" || name == "rayleigh") {
    lambda = {uniform_in(rng, 0.5, 1.5)};
  } else if (name == "bernoulli" || name == "binomial") {
    lambda = {uniform_in(rng, 0.2, 0.8)};
  } else if (name == "multinomial") {
    lambda.assign(static_cast<std::size_t>(d), 0.0);
    double total = 0.0;
    for (double& v : lambda) {
      v = 0.5 + rng.uniform01();
      total += v;
    }
    for (double& v : lambda) v /= total;
  } else if (name == "gamma") {
    lambda = {uniform_in(rng, 0.5, 2.0), uniform_in(rng, 1.0, 4.0)};
  } else if (name == "beta") {
    lambda = {uniform_in(rng, 1.0, 4.0), uniform_in(rng, 1.0, 4.0)};
  } else if (name == "inverse_gaussian") {
    lambda = {uniform_in(rng, 0.5, 2.0), uniform_in(rng, 1.0, 4.0)};
  } else if (name == "dirichlet") {
    lambda.assign(static_cast<std::size_t>(d), 0.0);
    for (double& v : lambda) v = uniform_in(rng, 1.0, 4.0);
  } else {
    return random_natural(family, rng);
  }
  return expfam::natural_params(family.source_to_natural(lambda));
}

/// Random direction of given norm that keeps theta + direction inside the
/// family's parameter-shape constraints (symmetric matrix blocks for the
/// multivariate Gaussian).
inline std::vector<double> random_direction(const expfam::Family& family, expfam::Rng& rng,
                                            double norm) {
  std::vector<double> dir(static_cast<std::size_t>(family.order()));
  for (double& v : dir) v = rng.uniform01() - 0.5;
  if (family.name() == "multivariate_gaussian") {
    const int d = family.obs_dim();
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double avg = 0.5 * (dir[d + i * d + j] + dir[d + j * d + i]);
        dir[d + i * d + j] = dir[d + j * d + i] = avg;
      }
  }
  double length = 0.0;
  for (double v : dir) length += v * v;
  length = std::sqrt(length);
  for (double& v : dir) v *= norm / length;
  return dir;
}

/// Numerical KL(P||Q) by quadrature or exhaustive summation, independent
/// of any closed form or Bregman identity. Throws for supports that need
/// Monte Carlo instead.
inline double numeric_kl(const expfam::Family& family, const expfam::ParamVector& p,
                         const expfam::ParamVector& q) {
  using namespace expfam;
  const ParamVector tp = convert(family, p, Space::natural);
  const ParamVector tq = convert(family, q, Space::natural);
  auto contribution = [&](const Observation& x) {
    const double lp = log_density(family, x, tp);
    if (lp < -745.0) return 0.0;  // e^lp underflows; p log(p/q) -> 0
    return std::exp(lp) * (lp - log_density(family, x, tq));
  };
  const double inf = std::numeric_limits<double>::infinity();
  QuadratureSpec spec{.lower = -inf, .upper = inf, .abs_tol = 1e-10,
                      .rel_tol = 1e-10, .max_depth = 80};
  switch (family.descriptor().support) {
    case SupportKind::real_line:
      if (family.obs_dim() != 1) break;
      return adaptive_quadrature([&](double x) { return contribution({x}); }, spec).value;
    case SupportKind::positive_reals:
      spec.lower = 0.0;
      return adaptive_quadrature([&](double x) { return contribution({x}); }, spec).value;
    case SupportKind::unit_interval:
      spec.lower = 0.0;
      spec.upper = 1.0;
      return adaptive_quadrature([&](double x) { return contribution({x}); }, spec).value;
    case SupportKind::nonneg_integers: {
      long upper = 1L << 40;
      if (auto bound = family.integer_support_bound()) upper = *bound;
      const std::vector<double> eta = expectation_values(family, tp);
      const double bulk = std::abs(eta[0]) + 10.0;
      StableSum acc;
      for (long x = 0; x <= upper; ++x) {
        const Observation obs{static_cast<double>(x)};
        const double lp = log_density(family, obs, tp);
        acc.add(lp < -745.0 ? 0.0 : std::exp(lp) * (lp - log_density(family, obs, tq)));
        if (static_cast<double>(x) > bulk && std::exp(lp) < 1e-18) break;
      }
      return acc.value();
    }
    case SupportKind::count_vector: {
      const long n = std::lround(family.descriptor().fixed_hyperparams.at("n"));
      StableSum acc;
      std::vector<double> x(static_cast<std::size_t>(family.obs_dim()), 0.0);
      expfam::detail::enumerate_count_vectors(
          family.obs_dim(), n, x, 0,
          [&](const Observation& obs) { acc.add(contribution(obs)); });
      return acc.value();
    }
    case SupportKind::simplex_interior: {
      if (family.obs_dim() != 3) break;
      QuadratureSpec outer{.lower = 0.0, .upper = 1.0, .abs_tol = 1e-9,
                           .rel_tol = 1e-9, .max_depth = 60};
      return adaptive_quadrature_2d(
                 [&](double x1, double x2) {
                   const double x3 = 1.0 - x1 - x2;
                   return x3 > 0.0 ? contribution({x1, x2, x3}) : 0.0;
                 },
                 outer, [](double) { return 0.0; }, [](double x1) { return 1.0 - x1; })
          .value;
    }
    default: break;
  }
  throw expfam::Error("numeric_kl: unsupported support for " + family.name());
}

/// Monte-Carlo KL(P||Q) for supports without a deterministic scheme.
inline expfam::McEstimate mc_kl(const expfam::Family& family, const expfam::ParamVector& p,
                                const expfam::ParamVector& q, long n, expfam::RngSeed seed) {
  using namespace expfam;
  const ParamVector tp = convert(family, p, Space::natural);
  const ParamVector tq = convert(family, q, Space::natural);
  const std::vector<double> lambda = source_values(family, p);
  return monte_carlo_expectation(
      [&](Rng& rng) { return family.sample(lambda, 1, rng)[0]; },
      [&](const Observation& x) {
        return log_density(family, x, tp) - log_density(family, x, tq);
      },
      n, seed);
}

}  // namespace testsupport
