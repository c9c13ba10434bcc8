#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "expfam/errors.hpp"
#include "expfam/linalg.hpp"
#include "expfam/numerics.hpp"
#include "expfam/quadrature.hpp"
#include "expfam/rng.hpp"

namespace expfam {

/// The three coordinate systems of an exponential family: traditional
/// source parameters, natural parameters (the canonical decomposition's
/// theta) and expectation parameters (eta = E[t(X)]).
enum class Space { source, natural, expectation };

inline const char* to_string(Space s) {
  switch (s) {
    case Space::source: return "source";
    case Space::natural: return "natural";
    case Space::expectation: return "expectation";
  }
  return "?";
}

enum class SupportKind {
  real_line,
  positive_reals,
  unit_interval,
  nonneg_integers,
  count_vector,
  simplex_interior,
  positive_definite_matrix
};

/// Immutable description of one family: dimensions, support and
/// closed-form capability flags. Hyperparameters that are fixed rather
/// than estimated (sigma2, n, d, k) live here.
struct FamilyDescriptor {
  std::string name;
  int obs_dim = 1;
  int order = 1;
  SupportKind support = SupportKind::real_line;
  bool has_closed_conjugate = false;
  bool carrier_is_zero = false;
  bool has_closed_kl = false;
  bool has_closed_mle = false;
  std::map<std::string, double> fixed_hyperparams;
};

/// A parameter point together with the space it lives in. Matrix-valued
/// blocks (multivariate Gaussian) are stored flattened row-major.
struct ParamVector {
  Space space = Space::source;
  std::vector<double> values;
};

inline ParamVector source_params(std::vector<double> values) {
  return ParamVector{Space::source, std::move(values)};
}
inline ParamVector natural_params(std::vector<double> values) {
  return ParamVector{Space::natural, std::move(values)};
}
inline ParamVector expectation_params(std::vector<double> values) {
  return ParamVector{Space::expectation, std::move(values)};
}

/// A point of the sample space. Count-valued families store integers as
/// doubles.
using Observation = std::vector<double>;

/// Named source-parameter field, for file formats and CLI rendering.
/// length > 1 means the field is a flat array (row-major for matrices).
struct ParamField {
  std::string key;
  int length = 1;
};

/// Abstract exponential family with canonical decomposition
///   p(x; theta) = exp(<t(x), theta> - F(theta) + k(x)).
///
/// Derived classes provide the flash-card formulas; all validation and
/// generic machinery (Legendre fallbacks, Hessians by differences,
/// normalization checks) lives here. Instances are immutable and safe to
/// share between threads.
class Family {
public:
  virtual ~Family() = default;
  Family(const Family&) = delete;
  Family& operator=(const Family&) = delete;

  const FamilyDescriptor& descriptor() const { return descriptor_; }
  const std::string& name() const { return descriptor_.name; }
  int order() const { return descriptor_.order; }
  int obs_dim() const { return descriptor_.obs_dim; }

  /// Length of the flat parameter vector in the given space. Equal to the
  /// order except for families whose source parameterization is redundant
  /// (multinomial probabilities include the implied last component).
  virtual int param_length(Space space) const {
    (void)space;
    return descriptor_.order;
  }

  // ----- domains ------------------------------------------------------
  virtual bool in_support(const Observation& x) const = 0;
  virtual bool in_natural_domain(const std::vector<double>& theta) const = 0;
  virtual bool in_expectation_domain(const std::vector<double>& eta) const = 0;
  virtual bool in_source_domain(const std::vector<double>& lambda) const = 0;

  // ----- canonical decomposition ---------------------------------------
  std::vector<double> sufficient_statistic(const Observation& x) const {
    check_support(x);
    return t_(x);
  }

  double carrier_measure(const Observation& x) const {
    check_support(x);
    return k_(x);
  }

  double log_normalizer(const std::vector<double>& theta) const {
    check_values(theta, Space::natural);
    return F_(theta);
  }

  std::vector<double> grad_log_normalizer(const std::vector<double>& theta) const {
    check_values(theta, Space::natural);
    return gradF_(theta);
  }

  /// Hessian of F at theta: analytic where the derived class provides it,
  /// otherwise central differences of grad F with a per-coordinate step
  /// h = 1e-5 * (1 + |theta_i|).
  Matrix log_normalizer_hessian(const std::vector<double>& theta) const {
    check_values(theta, Space::natural);
    if (auto h = hessF_(theta)) return *h;
    const std::size_t d = theta.size();
    Matrix hess(d, d);
    std::vector<double> probe = theta;
    for (std::size_t j = 0; j < d; ++j) {
      const double tj = theta[j];
      const double h_j = 1e-5 * (1.0 + std::abs(tj));
      probe[j] = tj + h_j;
      const std::vector<double> gp = gradF_(probe);
      probe[j] = tj - h_j;
      const std::vector<double> gm = gradF_(probe);
      probe[j] = tj;
      for (std::size_t i = 0; i < d; ++i) hess(i, j) = (gp[i] - gm[i]) / (2.0 * h_j);
    }
    // Symmetrize away the finite-difference asymmetry.
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) {
        const double avg = 0.5 * (hess(i, j) + hess(j, i));
        hess(i, j) = avg;
        hess(j, i) = avg;
      }
    return hess;
  }

  // ----- Legendre dual --------------------------------------------------
  /// G(eta) = sup_theta <theta, eta> - F(theta). Closed form where the
  /// family has one, otherwise computed exactly at theta* = grad_conjugate.
  double conjugate(const std::vector<double>& eta) const {
    check_values(eta, Space::expectation);
    if (auto g = G_closed_(eta)) return *g;
    const std::vector<double> theta = gradG_(eta);
    return dot(theta, eta) - F_(theta);
  }

  /// grad G = (grad F)^{-1}: the natural parameter whose mean is eta.
  std::vector<double> grad_conjugate(const std::vector<double>& eta) const {
    check_values(eta, Space::expectation);
    return gradG_(eta);
  }

  // ----- conversions (flash-card formulas) ------------------------------
  std::vector<double> source_to_natural(const std::vector<double>& lambda) const {
    check_values(lambda, Space::source);
    return to_natural_(lambda);
  }
  std::vector<double> natural_to_source(const std::vector<double>& theta) const {
    check_values(theta, Space::natural);
    return to_source_(theta);
  }
  std::vector<double> source_to_expectation(const std::vector<double>& lambda) const {
    check_values(lambda, Space::source);
    return lambda_to_eta_(lambda);
  }
  std::vector<double> expectation_to_source(const std::vector<double>& eta) const {
    check_values(eta, Space::expectation);
    return eta_to_lambda_(eta);
  }

  // ----- sampling --------------------------------------------------------
  /// n i.i.d. draws given source parameters; deterministic for a fixed Rng
  /// state. Degenerate boundary probabilities (Bernoulli p in {0,1}) are
  /// accepted by samplers even though conversions treat them as errors.
  std::vector<Observation> sample(const std::vector<double>& lambda, long n, Rng& rng) const {
    if (n < 0) throw DataError(name() + ": sample size must be nonnegative");
    if (static_cast<int>(lambda.size()) != param_length(Space::source) ||
        !in_sampling_domain_(lambda)) {
      throw DomainError(name() + ": invalid source parameters for sampling");
    }
    std::vector<Observation> draws;
    draws.reserve(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) draws.push_back(sample_one_(lambda, rng));
    return draws;
  }

  // ----- optional closed forms ------------------------------------------
  /// KL(P||Q) in source coordinates where the catalog has a closed form.
  virtual std::optional<double> kl_closed_form(const std::vector<double>& lambda_p,
                                               const std::vector<double>& lambda_q) const {
    (void)lambda_p;
    (void)lambda_q;
    return std::nullopt;
  }

  /// Maximum-likelihood source parameters where the catalog gives a
  /// formula (possibly an implicit equation solved by Newton).
  virtual std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const {
    (void)samples;
    return std::nullopt;
  }

  /// E_p[k(X)] under theta, where a deterministic expression exists.
  virtual std::optional<double> carrier_mean(const std::vector<double>& theta) const {
    if (descriptor_.carrier_is_zero) return 0.0;
    (void)theta;
    return std::nullopt;
  }

  // ----- metadata ---------------------------------------------------------
  virtual std::vector<ParamField> source_fields() const = 0;

  /// Largest value of a 1-dimensional integer support, if finite
  /// (Bernoulli: 1, binomial: n). Unbounded supports return nullopt.
  virtual std::optional<long> integer_support_bound() const { return std::nullopt; }

  // ----- validation helpers ------------------------------------------------
  void check_support(const Observation& x) const {
    if (static_cast<int>(x.size()) != descriptor_.obs_dim || !in_support(x)) {
      throw DomainError(name() + ": observation outside the support");
    }
  }

  void check_values(const std::vector<double>& values, Space space) const {
    if (static_cast<int>(values.size()) != param_length(space)) {
      throw DomainError(name() + ": wrong parameter length for " +
                        std::string(to_string(space)) + " space");
    }
    for (double v : values) {
      if (!std::isfinite(v)) {
        throw DomainError(name() + ": non-finite parameter value");
      }
    }
    const bool ok = space == Space::source      ? in_source_domain(values)
                    : space == Space::natural   ? in_natural_domain(values)
                                                : in_expectation_domain(values);
    if (!ok) {
      throw DomainError(name() + ": parameters outside the open " +
                        std::string(to_string(space)) + " domain");
    }
  }

protected:
  explicit Family(FamilyDescriptor descriptor) : descriptor_(std::move(descriptor)) {}

  // Formula hooks. Inputs have already been validated.
  virtual std::vector<double> t_(const Observation& x) const = 0;
  virtual double k_(const Observation& x) const = 0;
  virtual double F_(const std::vector<double>& theta) const = 0;
  virtual std::vector<double> gradF_(const std::vector<double>& theta) const = 0;
  virtual std::optional<Matrix> hessF_(const std::vector<double>& theta) const {
    (void)theta;
    return std::nullopt;
  }
  virtual std::optional<double> G_closed_(const std::vector<double>& eta) const {
    (void)eta;
    return std::nullopt;
  }
  virtual std::vector<double> gradG_(const std::vector<double>& eta) const = 0;
  virtual std::vector<double> to_natural_(const std::vector<double>& lambda) const = 0;
  virtual std::vector<double> to_source_(const std::vector<double>& theta) const = 0;
  virtual std::vector<double> lambda_to_eta_(const std::vector<double>& lambda) const = 0;
  virtual std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const = 0;
  virtual Observation sample_one_(const std::vector<double>& lambda, Rng& rng) const = 0;
  virtual bool in_sampling_domain_(const std::vector<double>& lambda) const {
    return in_source_domain(lambda);
  }

  /// Damped Newton solve of grad F(theta) = eta, jacobian = Hessian of F.
  /// `keep_feasible` nudges an iterate back into the natural domain.
  std::vector<double> invert_gradient_(
      const std::vector<double>& eta, std::vector<double> theta,
      const std::function<void(std::vector<double>&)>& keep_feasible, int max_iter = 200,
      double tol = 1e-13) const {
    auto residual_norm = [&](const std::vector<double>& g) {
      double worst = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        worst = std::max(worst, std::abs(g[i] - eta[i]) / (1.0 + std::abs(eta[i])));
      }
      return worst;
    };
    std::vector<double> grad = gradF_(theta);
    double best = residual_norm(grad);
    for (int iter = 0; iter < max_iter; ++iter) {
      if (best < tol) return theta;
      Matrix hess = log_normalizer_hessian(theta);
      std::vector<double> rhs(eta.size());
      for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = eta[i] - grad[i];
      std::vector<double> step = solve(hess, rhs);
      double scale = 1.0;
      bool advanced = false;
      for (int halving = 0; halving < 60; ++halving) {
        std::vector<double> candidate = theta;
        for (std::size_t i = 0; i < candidate.size(); ++i) candidate[i] += scale * step[i];
        keep_feasible(candidate);
        if (in_natural_domain(candidate)) {
          const std::vector<double> g = gradF_(candidate);
          const double r = residual_norm(g);
          if (std::isfinite(r) && r < best) {
            theta = std::move(candidate);
            grad = g;
            best = r;
            advanced = true;
            break;
          }
        }
        scale *= 0.5;
      }
      if (!advanced) break;
    }
    if (best < 1e-9) return theta;  // acceptable but short of full precision
    throw NumericalError(name() + ": gradient inversion failed to converge", theta);
  }

  FamilyDescriptor descriptor_;
};

using FamilyPtr = std::shared_ptr<const Family>;

// ===== generic operations on space-tagged parameters ======================

namespace detail {

inline void require_space(const ParamVector& p, Space space, const char* op) {
  if (p.space != space) {
    throw DomainError(std::string(op) + ": expected " + to_string(space) +
                      "-space parameters, got " + to_string(p.space));
  }
}

}  // namespace detail

/// Natural-parameter values of p, converting from its tagged space.
inline std::vector<double> natural_values(const Family& family, const ParamVector& p) {
  switch (p.space) {
    case Space::natural:
      family.check_values(p.values, Space::natural);
      return p.values;
    case Space::source: return family.source_to_natural(p.values);
    case Space::expectation: return family.grad_conjugate(p.values);
  }
  throw DomainError("unknown parameter space");
}

inline std::vector<double> expectation_values(const Family& family, const ParamVector& p) {
  switch (p.space) {
    case Space::expectation:
      family.check_values(p.values, Space::expectation);
      return p.values;
    case Space::source: return family.source_to_expectation(p.values);
    case Space::natural: return family.grad_log_normalizer(p.values);
  }
  throw DomainError("unknown parameter space");
}

inline std::vector<double> source_values(const Family& family, const ParamVector& p) {
  switch (p.space) {
    case Space::source:
      family.check_values(p.values, Space::source);
      return p.values;
    case Space::natural: return family.natural_to_source(p.values);
    case Space::expectation: return family.expectation_to_source(p.values);
  }
  throw DomainError("unknown parameter space");
}

/// Converts parameters between spaces using the card formulas for
/// source <-> natural/expectation and the gradient maps between the dual
/// spaces. Identity when target equals the tagged space.
inline ParamVector convert(const Family& family, const ParamVector& p, Space target) {
  if (p.space == target) {
    family.check_values(p.values, target);
    return p;
  }
  switch (target) {
    case Space::source: return ParamVector{target, source_values(family, p)};
    case Space::natural: return ParamVector{target, natural_values(family, p)};
    case Space::expectation: return ParamVector{target, expectation_values(family, p)};
  }
  throw DomainError("unknown parameter space");
}

inline std::vector<double> sufficient_statistic(const Family& family, const Observation& x) {
  return family.sufficient_statistic(x);
}

inline double carrier_measure(const Family& family, const Observation& x) {
  return family.carrier_measure(x);
}

inline double log_normalizer(const Family& family, const ParamVector& theta) {
  detail::require_space(theta, Space::natural, "log_normalizer");
  return family.log_normalizer(theta.values);
}

inline ParamVector grad_log_normalizer(const Family& family, const ParamVector& theta) {
  detail::require_space(theta, Space::natural, "grad_log_normalizer");
  return expectation_params(family.grad_log_normalizer(theta.values));
}

inline double conjugate(const Family& family, const ParamVector& eta) {
  detail::require_space(eta, Space::expectation, "conjugate");
  return family.conjugate(eta.values);
}

inline ParamVector grad_conjugate(const Family& family, const ParamVector& eta) {
  detail::require_space(eta, Space::expectation, "grad_conjugate");
  return natural_params(family.grad_conjugate(eta.values));
}

/// log p(x; theta) = <t(x), theta> - F(theta) + k(x). Parameters may be
/// given in any space.
inline double log_density(const Family& family, const Observation& x, const ParamVector& p) {
  const std::vector<double> theta = natural_values(family, p);
  return dot(family.sufficient_statistic(x), theta) - family.log_normalizer(theta) +
         family.carrier_measure(x);
}

inline double density(const Family& family, const Observation& x, const ParamVector& p) {
  return std::exp(log_density(family, x, p));
}

/// Fisher information in natural coordinates: the Hessian of F.
inline Matrix fisher_information_natural(const Family& family, const ParamVector& theta) {
  detail::require_space(theta, Space::natural, "fisher_information_natural");
  return family.log_normalizer_hessian(theta.values);
}

/// Fisher information after the reparameterization with jacobian
/// J = d theta / d lambda: J^T I(theta) J.
inline Matrix reparameterized_fisher(const Family& family, const ParamVector& theta,
                                     const Matrix& jacobian) {
  if (jacobian.rows() != jacobian.cols() ||
      jacobian.rows() != static_cast<std::size_t>(family.order())) {
    throw DomainError("reparameterized_fisher: jacobian must be order x order");
  }
  if (determinant(jacobian) == 0.0) {
    throw DomainError("reparameterized_fisher: singular jacobian");
  }
  const Matrix fisher = fisher_information_natural(family, theta);
  return jacobian.transposed().multiply(fisher.multiply(jacobian));
}

/// kappa_theta(x) = F(theta + x) - F(theta); exp of this is the moment
/// generating function of t(X).
inline double cumulant_generating(const Family& family, const ParamVector& theta,
                                  const std::vector<double>& x) {
  detail::require_space(theta, Space::natural, "cumulant_generating");
  family.check_values(theta.values, Space::natural);
  if (x.size() != theta.values.size()) {
    throw DomainError("cumulant_generating: displacement has wrong length");
  }
  std::vector<double> shifted = theta.values;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += x[i];
  return family.log_normalizer(shifted) - family.log_normalizer(theta.values);
}

struct NormalizationReport {
  bool ok = false;
  double integral = 0.0;
};

namespace detail {

inline double tail_cut_sum(const Family& family, const ParamVector& theta) {
  // Geometric-tail mass functions: stop once terms are negligible
  // relative to the partial sum and we are past the bulk.
  const std::vector<double> eta = expectation_values(family, theta);
  const double bulk = std::abs(eta[0]) + 10.0;
  StableSum acc;
  const long hard_cap = 20000000;
  for (long x = 0;; ++x) {
    const double term = density(family, {static_cast<double>(x)}, theta);
    acc.add(term);
    if (static_cast<double>(x) > bulk && term < 1e-16 * std::max(acc.value(), 1e-300)) break;
    if (x == hard_cap) {
      throw NumericalError(family.name() + ": support summation did not terminate",
                           {acc.value()});
    }
  }
  return acc.value();
}

inline void enumerate_count_vectors(int k, long n, std::vector<double>& x, std::size_t pos,
                                    const std::function<void(const Observation&)>& visit) {
  if (pos + 1 == static_cast<std::size_t>(k)) {
    x[pos] = static_cast<double>(n);
    visit(x);
    return;
  }
  for (long v = 0; v <= n; ++v) {
    x[pos] = static_cast<double>(v);
    enumerate_count_vectors(k, n - v, x, pos + 1, visit);
  }
}

}  // namespace detail

/// Integrates (or sums) the density over the support and reports whether
/// |integral - 1| < tol. Quadrature-based supports are limited to
/// effective dimension <= 2.
inline NormalizationReport verify_normalization(const Family& family, const ParamVector& p,
                                                double tol) {
  const ParamVector theta = convert(family, p, Space::natural);
  const double inf = std::numeric_limits<double>::infinity();
  auto density1d = [&](double x) {
    const Observation obs{x};
    return family.in_support(obs) ? density(family, obs, theta) : 0.0;
  };
  QuadratureSpec spec;
  spec.abs_tol = std::min(1e-9, 0.01 * tol);
  spec.rel_tol = spec.abs_tol;
  spec.max_depth = 60;

  double integral = 0.0;
  switch (family.descriptor().support) {
    case SupportKind::real_line: {
      if (family.obs_dim() == 1) {
        spec.lower = -inf;
        spec.upper = inf;
        integral = adaptive_quadrature(density1d, spec).value;
      } else if (family.obs_dim() == 2) {
        QuadratureSpec outer = spec;
        outer.lower = -inf;
        outer.upper = inf;
        integral = adaptive_quadrature_2d(
                       [&](double x, double y) { return density(family, {x, y}, theta); },
                       outer, [&](double) { return -inf; }, [&](double) { return inf; })
                       .value;
      } else {
        throw DomainError(family.name() +
                          ": normalization check supports obs_dim <= 2 only");
      }
      break;
    }
    case SupportKind::positive_reals: {
      spec.lower = 0.0;
      spec.upper = inf;
      integral = adaptive_quadrature(density1d, spec).value;
      break;
    }
    case SupportKind::unit_interval: {
      spec.lower = 0.0;
      spec.upper = 1.0;
      integral = adaptive_quadrature(density1d, spec).value;
      break;
    }
    case SupportKind::nonneg_integers: {
      if (auto bound = family.integer_support_bound()) {
        StableSum acc;
        for (long x = 0; x <= *bound; ++x) {
          acc.add(density(family, {static_cast<double>(x)}, theta));
        }
        integral = acc.value();
      } else {
        integral = detail::tail_cut_sum(family, theta);
      }
      break;
    }
    case SupportKind::count_vector: {
      const long n = std::lround(family.descriptor().fixed_hyperparams.at("n"));
      const int k = family.obs_dim();
      StableSum acc;
      std::vector<double> x(static_cast<std::size_t>(k), 0.0);
      detail::enumerate_count_vectors(
          k, n, x, 0, [&](const Observation& obs) { acc.add(density(family, obs, theta)); });
      integral = acc.value();
      break;
    }
    case SupportKind::simplex_interior: {
      const int k = family.obs_dim();
      if (k == 2) {
        spec.lower = 0.0;
        spec.upper = 1.0;
        integral = adaptive_quadrature(
                       [&](double x) { return density(family, {x, 1.0 - x}, theta); }, spec)
                       .value;
      } else if (k == 3) {
        QuadratureSpec outer = spec;
        outer.lower = 0.0;
        outer.upper = 1.0;
        integral =
            adaptive_quadrature_2d(
                [&](double x1, double x2) {
                  const double x3 = 1.0 - x1 - x2;
                  return x3 > 0.0 ? density(family, {x1, x2, x3}, theta) : 0.0;
                },
                outer, [&](double) { return 0.0; }, [&](double x1) { return 1.0 - x1; })
                .value;
      } else {
        throw DomainError(family.name() + ": normalization check supports k <= 3 only");
      }
      break;
    }
    case SupportKind::positive_definite_matrix:
      throw DomainError(family.name() + ": no quadrature scheme for matrix supports");
  }
  return NormalizationReport{std::abs(integral - 1.0) < tol, integral};
}

}  // namespace expfam
