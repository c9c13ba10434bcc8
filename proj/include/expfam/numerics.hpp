#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "expfam/errors.hpp"
#include "expfam/rng.hpp"

namespace expfam {

/// Kahan-Babuska (Neumaier) compensated accumulator. Summation order is
/// the insertion order, so results are bit-stable across runs.
class StableSum {
public:
  void add(double value) {
    const double t = sum_ + value;
    if (std::abs(sum_) >= std::abs(value)) {
      compensation_ += (sum_ - t) + value;
    } else {
      compensation_ += (value - t) + sum_;
    }
    sum_ = t;
  }

  double value() const { return sum_ + compensation_; }

private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

/// Compensated sum of a sequence in its given order.
inline double stable_sum(std::span<const double> values) {
  StableSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

inline double stable_mean(std::span<const double> values) {
  if (values.empty()) throw DataError("stable_mean: empty input");
  return stable_sum(values) / static_cast<double>(values.size());
}

/// Central-difference gradient of f at x with a fixed step h per coordinate.
template <typename F>
std::vector<double> finite_diff_gradient(const F& f, std::vector<double> x, double h) {
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    grad[i] = (fp - fm) / (2.0 * h);
  }
  return grad;
}

struct NewtonOptions {
  double tol = 1e-12;
  int max_iter = 100;
  /// Optional projection applied to each iterate to keep it inside the
  /// domain of f (e.g. clamp to positive reals).
  std::function<double(double)> project;
};

/// Scalar Newton root finding with step damping. Returns a root r with
/// |f(r)| < tol; throws NumericalError carrying the last iterate otherwise.
template <typename F, typename DF>
double newton_solve(const F& f, const DF& df, double x0, const NewtonOptions& opts = {}) {
  double x = opts.project ? opts.project(x0) : x0;
  double fx = f(x);
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    if (std::abs(fx) < opts.tol) return x;
    const double d = df(x);
    if (d == 0.0 || !std::isfinite(d)) {
      throw NumericalError("newton_solve: zero or non-finite derivative", {x});
    }
    double step = fx / d;
    // Halve the step until the residual decreases and stays finite.
    for (int halving = 0; halving < 60; ++halving) {
      double candidate = x - step;
      if (opts.project) candidate = opts.project(candidate);
      const double fc = f(candidate);
      if (std::isfinite(fc) && std::abs(fc) < std::abs(fx)) {
        x = candidate;
        fx = fc;
        break;
      }
      step *= 0.5;
      if (halving == 59) {
        throw NumericalError("newton_solve: stalled (no descent step found)", {x});
      }
    }
  }
  if (std::abs(fx) < opts.tol) return x;
  throw NumericalError("newton_solve: max iterations exceeded", {x});
}

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Monte-Carlo estimate of E[g(X)] with X drawn by `sampler(rng)`.
/// Deterministic for a fixed seed.
template <typename Sampler, typename G>
McEstimate monte_carlo_expectation(const Sampler& sampler, const G& g, long n, RngSeed seed) {
  if (n < 2) throw DataError("monte_carlo_expectation: need n >= 2");
  Rng rng(seed);
  StableSum sum, sum_sq;
  for (long i = 0; i < n; ++i) {
    const double value = g(sampler(rng));
    sum.add(value);
    sum_sq.add(value * value);
  }
  const double nd = static_cast<double>(n);
  const double mean = sum.value() / nd;
  double variance = (sum_sq.value() - nd * mean * mean) / (nd - 1.0);
  if (variance < 0.0) variance = 0.0;
  return McEstimate{mean, std::sqrt(variance / nd)};
}

}  // namespace expfam
