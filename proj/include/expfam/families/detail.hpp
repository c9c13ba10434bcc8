#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "expfam/errors.hpp"
#include "expfam/linalg.hpp"
#include "expfam/rng.hpp"
#include "expfam/special_functions.hpp"

namespace expfam::families::detail {

/// Gamma(shape, 1) draw: Marsaglia-Tsang squeeze for shape >= 1, with the
/// power-of-uniform boost below 1.
inline double standard_gamma(double shape, Rng& rng) {
  if (shape < 1.0) {
    const double u = rng.uniform01();
    return standard_gamma(shape + 1.0, rng) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / (3.0 * std::sqrt(d));
  while (true) {
    double z, v;
    do {
      z = rng.normal();
      v = 1.0 + c * z;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform01();
    if (u < 1.0 - 0.0331 * z * z * z * z) return d * v;
    if (std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) return d * v;
  }
}

/// Approximate inverse of the digamma function on the positive axis,
/// refined by a few guarded Newton steps.
inline double inverse_digamma(double y) {
  double x = (y >= -2.22) ? std::exp(y) + 0.5 : -1.0 / (y + 0.5772156649015329);
  for (int i = 0; i < 8; ++i) {
    const double next = x - (expfam::digamma(x) - y) / expfam::trigamma(x);
    x = (next > 0.0) ? next : 0.5 * x;
  }
  return x;
}

/// Solves psi(alpha_i) - psi(sum_j alpha_j) = eta_i for alpha > 0.
/// This is the gradient inversion shared by the Beta and Dirichlet cards
/// (and their maximum-likelihood equations). Fixed-point iterations via
/// the inverse digamma bring the iterate close; a damped Newton on the
/// full system finishes to near machine precision.
inline std::vector<double> solve_mean_log_system(const std::vector<double>& eta,
                                                 const std::string& who) {
  const std::size_t k = eta.size();
  std::vector<double> alpha(k, 1.0);

  auto residual = [&](const std::vector<double>& a, std::vector<double>& r) {
    double total = 0.0;
    for (double v : a) total += v;
    const double psi_total = expfam::digamma(total);
    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      r[i] = expfam::digamma(a[i]) - psi_total - eta[i];
      worst = std::max(worst, std::abs(r[i]));
    }
    return worst;
  };

  std::vector<double> r(k);
  double worst = residual(alpha, r);
  for (int iter = 0; iter < 300 && worst > 1e-9; ++iter) {
    double total = 0.0;
    for (double v : alpha) total += v;
    const double psi_total = expfam::digamma(total);
    for (std::size_t i = 0; i < k; ++i) {
      alpha[i] = inverse_digamma(psi_total + eta[i]);
    }
    worst = residual(alpha, r);
  }

  for (int iter = 0; iter < 80 && worst > 1e-13; ++iter) {
    double total = 0.0;
    for (double v : alpha) total += v;
    Matrix jac(k, k, -expfam::trigamma(total));
    for (std::size_t i = 0; i < k; ++i) jac(i, i) += expfam::trigamma(alpha[i]);
    std::vector<double> rhs(k);
    for (std::size_t i = 0; i < k; ++i) rhs[i] = -r[i];
    const std::vector<double> step = solve(jac, rhs);
    double scale = 1.0;
    bool advanced = false;
    for (int halving = 0; halving < 50; ++halving) {
      std::vector<double> candidate(k);
      bool positive = true;
      for (std::size_t i = 0; i < k; ++i) {
        candidate[i] = alpha[i] + scale * step[i];
        positive = positive && candidate[i] > 0.0;
      }
      if (positive) {
        std::vector<double> rc(k);
        const double wc = residual(candidate, rc);
        if (std::isfinite(wc) && wc < worst) {
          alpha = std::move(candidate);
          r = std::move(rc);
          worst = wc;
          advanced = true;
          break;
        }
      }
      scale *= 0.5;
    }
    if (!advanced) break;
  }

  if (!(worst < 1e-9)) {
    throw NumericalError(who + ": digamma-system inversion failed to converge", alpha);
  }
  return alpha;
}

/// Solves ln k - psi(k) = s for the Gamma shape, s > 0.
inline double solve_gamma_shape(double s, const std::string& who) {
  if (!(s > 0.0)) {
    throw DomainError(who + ": mean-log constraint requires ln(mean) > mean(log)");
  }
  double k = (3.0 - s + std::sqrt((s - 3.0) * (s - 3.0) + 24.0 * s)) / (12.0 * s);
  if (!(k > 0.0) || !std::isfinite(k)) k = 1.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = std::log(k) - expfam::digamma(k) - s;
    if (std::abs(f) < 1e-14 * (1.0 + std::abs(s))) return k;
    const double df = 1.0 / k - expfam::trigamma(k);
    double next = k - f / df;
    if (!(next > 0.0)) next = 0.5 * k;
    if (!std::isfinite(next)) break;
    k = next;
  }
  const double f = std::log(k) - expfam::digamma(k) - s;
  if (std::abs(f) < 1e-10 * (1.0 + std::abs(s))) return k;
  throw NumericalError(who + ": shape equation failed to converge", {k});
}

}  // namespace expfam::families::detail
