#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "expfam/errors.hpp"

namespace expfam {

/// Integration request. Infinite endpoints are expressed with
/// +/- std::numeric_limits<double>::infinity() and handled internally by
/// variable substitution onto a finite interval.
struct QuadratureSpec {
  double lower = 0.0;
  double upper = 1.0;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 50;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  int evaluations = 0;
};

namespace detail {

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule
// (QUADPACK dqk15 constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};

inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};

inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  int depth;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <typename F>
Segment gauss_kronrod_15(const F& f, double a, double b, int depth) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);

  double fv[15];
  const double fc = f(center);
  fv[14] = fc;
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kGK15Nodes[j];
    fv[2 * j] = f(center - dx);
    fv[2 * j + 1] = f(center + dx);
  }

  double resk = kGK15WeightsK[7] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double sum = fv[2 * j] + fv[2 * j + 1];
    resk += kGK15WeightsK[j] * sum;
    resabs += kGK15WeightsK[j] * (std::abs(fv[2 * j]) + std::abs(fv[2 * j + 1]));
  }
  double resg = kGK15WeightsG[3] * fc;
  for (int j = 0; j < 3; ++j) {
    resg += kGK15WeightsG[j] * (fv[2 * (2 * j + 1)] + fv[2 * (2 * j + 1) + 1]);
  }

  const double reskh = resk * 0.5;
  double resasc = kGK15WeightsK[7] * std::abs(fc - reskh);
  for (int j = 0; j < 7; ++j) {
    resasc += kGK15WeightsK[j] *
              (std::abs(fv[2 * j] - reskh) + std::abs(fv[2 * j + 1] - reskh));
  }

  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  const double eps = std::numeric_limits<double>::epsilon();
  const double tiny = std::numeric_limits<double>::min();
  if (resabs > tiny / (50.0 * eps)) {
    err = std::max(err, 50.0 * eps * resabs);
  }
  return Segment{a, b, resk * half, err, depth};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod integration of f over [spec.lower, spec.upper].
/// Infinite endpoints are substituted onto a finite interval first.
/// Throws NumericalError carrying the partial estimate when the requested
/// tolerance cannot be met within the subdivision budget.
template <typename F>
QuadratureResult adaptive_quadrature(const F& f, const QuadratureSpec& spec) {
  if (!(spec.lower < spec.upper)) {
    throw DomainError("adaptive_quadrature: requires lower < upper");
  }
  if (!(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0) || spec.max_depth < 1) {
    throw DomainError("adaptive_quadrature: invalid tolerance settings");
  }

  const bool lower_inf = std::isinf(spec.lower);
  const bool upper_inf = std::isinf(spec.upper);
  std::function<double(double)> g;
  double a, b;
  if (lower_inf && upper_inf) {
    // x = t / (1 - t^2) maps (-1, 1) onto the real line.
    g = [&f](double t) {
      const double s = 1.0 - t * t;
      return f(t / s) * (1.0 + t * t) / (s * s);
    };
    a = -1.0;
    b = 1.0;
  } else if (upper_inf) {
    // x = lo + t / (1 - t) maps (0, 1) onto (lo, inf).
    const double lo = spec.lower;
    g = [&f, lo](double t) {
      const double s = 1.0 - t;
      return f(lo + t / s) / (s * s);
    };
    a = 0.0;
    b = 1.0;
  } else if (lower_inf) {
    // x = hi - t / (1 - t) maps (0, 1) onto (-inf, hi).
    const double hi = spec.upper;
    g = [&f, hi](double t) {
      const double s = 1.0 - t;
      return f(hi - t / s) / (s * s);
    };
    a = 0.0;
    b = 1.0;
  } else {
    g = [&f](double x) { return f(x); };
    a = spec.lower;
    b = spec.upper;
  }

  std::priority_queue<detail::Segment> queue;
  queue.push(detail::gauss_kronrod_15(g, a, b, 0));
  int evaluations = 15;
  double total_value = queue.top().value;
  double total_error = queue.top().error;

  const int max_segments = 4096;
  int segments = 1;
  while (total_error > std::max(spec.abs_tol, spec.rel_tol * std::abs(total_value))) {
    const detail::Segment worst = queue.top();
    if (worst.depth >= spec.max_depth || segments >= max_segments) {
      throw NumericalError(
          "adaptive_quadrature: failed to converge to requested tolerance",
          {total_value, total_error});
    }
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gauss_kronrod_15(g, worst.a, mid, worst.depth + 1);
    const auto right = detail::gauss_kronrod_15(g, mid, worst.b, worst.depth + 1);
    evaluations += 30;
    ++segments;
    total_value += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
  }
  return QuadratureResult{total_value, total_error, evaluations};
}

/// Nested adaptive quadrature of f(x, y) over
/// { outer.lower < x < outer.upper, inner_lower(x) < y < inner_upper(x) }.
/// The inner integrals run at a tighter tolerance than the outer one.
template <typename F2, typename LowerFn, typename UpperFn>
QuadratureResult adaptive_quadrature_2d(const F2& f, const QuadratureSpec& outer,
                                        const LowerFn& inner_lower,
                                        const UpperFn& inner_upper) {
  QuadratureSpec inner = outer;
  inner.abs_tol = 0.1 * outer.abs_tol;
  inner.rel_tol = 0.1 * outer.rel_tol;
  int evaluations = 0;
  auto outer_integrand = [&](double x) {
    QuadratureSpec row = inner;
    row.lower = inner_lower(x);
    row.upper = inner_upper(x);
    const QuadratureResult r = adaptive_quadrature([&](double y) { return f(x, y); }, row);
    evaluations += r.evaluations;
    return r.value;
  };
  QuadratureResult result = adaptive_quadrature(outer_integrand, outer);
  result.evaluations += evaluations;
  return result;
}

}  // namespace expfam
