#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "expfam/family.hpp"
#include "expfam/numerics.hpp"
#include "expfam/rng.hpp"

namespace expfam {

/// Finite mixture of members of one exponential family. Components are
/// kept in expectation coordinates (the EM updates are means there);
/// natural-space views are derived on demand.
struct MixtureModel {
  FamilyPtr family;
  std::vector<double> weights;
  std::vector<std::vector<double>> components;  // expectation space

  std::size_t size() const { return weights.size(); }
};

inline void validate_mixture(const MixtureModel& model) {
  if (!model.family) throw DataError("mixture: missing family");
  if (model.weights.empty() || model.weights.size() != model.components.size()) {
    throw DataError("mixture: weights and components disagree");
  }
  double total = 0.0;
  for (double w : model.weights) {
    if (!(w >= 0.0)) throw DataError("mixture: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw DataError("mixture: weights must sum to one");
  }
  for (const auto& eta : model.components) {
    model.family->check_values(eta, Space::expectation);
  }
}

/// Posterior component probabilities p(i, j), one row per observation.
struct Responsibilities {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // row-major

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
};

/// Per-iteration record of an EM run.
struct FitTrace {
  std::vector<double> average_log_likelihood;
  int iterations_run = 0;
  bool converged = false;
};

namespace detail {

// Cached natural-space view of each component.
struct ComponentView {
  std::vector<double> theta;
  double log_normalizer = 0.0;
  double conjugate = 0.0;  // G(eta)
  double log_weight = 0.0;
};

inline std::vector<ComponentView> component_views(const MixtureModel& model) {
  std::vector<ComponentView> views(model.size());
  for (std::size_t j = 0; j < model.size(); ++j) {
    views[j].theta = model.family->grad_conjugate(model.components[j]);
    views[j].log_normalizer = model.family->log_normalizer(views[j].theta);
    views[j].conjugate = model.family->conjugate(model.components[j]);
    views[j].log_weight =
        model.weights[j] > 0.0 ? std::log(model.weights[j])
                               : -std::numeric_limits<double>::infinity();
  }
  return views;
}

}  // namespace detail

/// log sum_j w_j p(x; theta_j), evaluated in the log domain.
inline double mixture_log_density(const MixtureModel& model, const Observation& x) {
  const auto views = detail::component_views(model);
  const auto t = model.family->sufficient_statistic(x);
  const double carrier = model.family->carrier_measure(x);
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> scores(views.size());
  for (std::size_t j = 0; j < views.size(); ++j) {
    scores[j] = views[j].log_weight + dot(t, views[j].theta) - views[j].log_normalizer +
                carrier;
    top = std::max(top, scores[j]);
  }
  if (!std::isfinite(top)) {
    throw NumericalError("mixture_log_density: all components underflowed");
  }
  double acc = 0.0;
  for (double s : scores) acc += std::exp(s - top);
  return top + std::log(acc);
}

/// Draws n observations and the component labels that generated them.
struct MixtureSample {
  std::vector<Observation> observations;
  std::vector<int> labels;
};

inline MixtureSample sample_mixture(const MixtureModel& model, long n, RngSeed seed) {
  validate_mixture(model);
  std::vector<std::vector<double>> lambdas(model.size());
  for (std::size_t j = 0; j < model.size(); ++j) {
    lambdas[j] = model.family->expectation_to_source(model.components[j]);
  }
  Rng rng(seed);
  MixtureSample out;
  out.observations.reserve(static_cast<std::size_t>(n));
  out.labels.reserve(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const double u = rng.uniform01();
    double cdf = 0.0;
    std::size_t j = 0;
    for (; j + 1 < model.size(); ++j) {
      cdf += model.weights[j];
      if (u <= cdf) break;
    }
    out.observations.push_back(model.family->sample(lambdas[j], 1, rng)[0]);
    out.labels.push_back(static_cast<int>(j));
  }
  return out;
}

/// Result of Lloyd-style Bregman hard clustering with the conjugate
/// generator G on expectation-space points.
struct HardClustering {
  std::vector<int> assignments;
  std::vector<std::vector<double>> centroids;
  std::vector<double> objective_trace;  // sum_i B_G(p_i || c_{a(i)}) per iteration
  int iterations_run = 0;
};

namespace detail {

// Assignment score: B_G(p || c) minus the point-only term G(p). Dropping
// G(p) keeps argmins intact and stays defined when p lies on the boundary
// of the expectation domain (e.g. p = t(x)).
struct CentroidScorer {
  std::vector<double> grad;  // grad G(c)
  double offset = 0.0;       // -G(c) + <c, grad G(c)>

  double score(const std::vector<double>& p) const {
    return offset - dot(p, grad);
  }
};

inline CentroidScorer make_scorer(const Family& family, const std::vector<double>& c) {
  CentroidScorer s;
  s.grad = family.grad_conjugate(c);
  s.offset = -family.conjugate(c) + dot(c, s.grad);
  return s;
}

inline double squared_euclidean(const std::vector<double>& a,
                                const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

// Shared Lloyd loop. `point_potentials` holds G(p_i) when the caller can
// evaluate it (interior points); the reported objective then equals the
// true Bregman objective, and farthest-point reseeding uses B_G itself.
inline HardClustering lloyd_bregman(const Family& family,
                                    std::span<const std::vector<double>> points, int k,
                                    RngSeed seed, int max_iter,
                                    const std::vector<double>* point_potentials) {
  const std::size_t n = points.size();
  if (k < 1 || n < static_cast<std::size_t>(k)) {
    throw DataError(family.name() + ": hard clustering needs n >= k >= 1");
  }
  Rng rng(seed);

  // k-means++ style seeding in Euclidean geometry, then one partition to
  // obtain interior means as the initial Bregman centroids.
  std::vector<std::size_t> seeds;
  seeds.push_back(static_cast<std::size_t>(rng.uniform01() * n) % n);
  std::vector<double> dist2(n);
  while (seeds.size() < static_cast<std::size_t>(k)) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t s : seeds) best = std::min(best, squared_euclidean(points[i], points[s]));
      dist2[i] = best;
      total += best;
    }
    std::size_t chosen = 0;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double cdf = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        cdf += dist2[i];
        if (cdf >= target) {
          chosen = i;
          break;
        }
      }
    } else {
      chosen = static_cast<std::size_t>(rng.uniform01() * n) % n;
    }
    seeds.push_back(chosen);
  }

  const std::size_t dim = points[0].size();
  std::vector<int> assignment(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < k; ++j) {
      const double d2 = squared_euclidean(points[i], points[seeds[j]]);
      if (d2 < best) {
        best = d2;
        assignment[i] = j;
      }
    }
  }

  auto means_of_partition = [&](const std::vector<int>& assign) {
    std::vector<std::vector<StableSum>> sums(k, std::vector<StableSum>(dim));
    std::vector<long> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      ++counts[assign[i]];
      for (std::size_t c = 0; c < dim; ++c) sums[assign[i]][c].add(points[i][c]);
    }
    std::vector<std::vector<double>> centroids(k, std::vector<double>(dim));
    for (int j = 0; j < k; ++j) {
      if (counts[j] == 0) continue;
      for (std::size_t c = 0; c < dim; ++c) {
        centroids[j][c] = sums[j][c].value() / static_cast<double>(counts[j]);
      }
    }
    return std::make_pair(centroids, counts);
  };

  HardClustering result;
  result.assignments = assignment;
  auto [centroids, counts] = means_of_partition(assignment);
  for (int j = 0; j < k; ++j) {
    if (counts[j] == 0) centroids[j] = points[seeds[j]];
    if (!family.in_expectation_domain(centroids[j])) {
      throw DataError(family.name() + ": degenerate cluster " + std::to_string(j) +
                      " (centroid on the expectation-domain boundary)");
    }
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<CentroidScorer> scorers;
    scorers.reserve(k);
    for (int j = 0; j < k; ++j) scorers.push_back(make_scorer(family, centroids[j]));

    bool changed = false;
    StableSum objective;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int best_j = 0;
      for (int j = 0; j < k; ++j) {
        const double s = scorers[j].score(points[i]);
        if (s < best) {  // ties resolve to the lowest index
          best = s;
          best_j = j;
        }
      }
      if (best_j != assignment[i]) changed = true;
      assignment[i] = best_j;
      objective.add(best + (point_potentials ? (*point_potentials)[i] : 0.0));
    }
    result.objective_trace.push_back(objective.value());
    result.iterations_run = iter + 1;

    auto [next, next_counts] = means_of_partition(assignment);
    for (int j = 0; j < k; ++j) {
      if (next_counts[j] > 0) continue;
      // Empty cluster: reseed the centroid at the point farthest from its
      // current centroid.
      std::size_t farthest = 0;
      double worst = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < n; ++i) {
        double d = scorers[assignment[i]].score(points[i]);
        if (point_potentials) d += (*point_potentials)[i];
        if (d > worst) {
          worst = d;
          farthest = i;
        }
      }
      next[j] = points[farthest];
      changed = true;
      if (!family.in_expectation_domain(next[j])) {
        throw DataError(family.name() + ": degenerate cluster " + std::to_string(j) +
                        " (reseeded centroid on the boundary)");
      }
    }
    centroids = std::move(next);
    if (!changed) break;
  }
  result.assignments = std::move(assignment);
  result.centroids = std::move(centroids);
  return result;
}

}  // namespace detail

/// Bregman hard clustering (Lloyd alternation under B_G) of points in the
/// open expectation domain. Centroid updates are arithmetic means, the
/// right-sided Bregman centroid; the reported objective is non-increasing.
inline HardClustering bregman_hard_clustering(const Family& family,
                                              std::span<const std::vector<double>> points,
                                              int k, RngSeed seed, int max_iter = 100) {
  std::vector<double> potentials(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    family.check_values(points[i], Space::expectation);
    potentials[i] = family.conjugate(points[i]);
  }
  return detail::lloyd_bregman(family, points, k, seed, max_iter, &potentials);
}

/// EM initialization: Bregman hard clustering of the sufficient
/// statistics, then weights n_i/n and per-cluster observed points.
inline MixtureModel em_init(FamilyPtr family_ptr, std::span<const Observation> data,
                            int k, RngSeed seed) {
  if (!family_ptr) throw DataError("em_init: missing family");
  const Family& family = *family_ptr;
  if (k < 1 || data.size() < static_cast<std::size_t>(k)) {
    throw DataError(family.name() + ": em_init needs n >= k >= 1");
  }
  std::vector<std::vector<double>> t_points;
  t_points.reserve(data.size());
  for (const auto& x : data) t_points.push_back(family.sufficient_statistic(x));

  MixtureModel model;
  model.family = family_ptr;

  std::vector<int> assignment(data.size(), 0);
  if (k > 1) {
    // t(x) may sit on the expectation-domain boundary, so no potentials.
    const auto clustering =
        detail::lloyd_bregman(family, t_points, k, seed, 100, nullptr);
    assignment = clustering.assignments;
  }

  const std::size_t order = static_cast<std::size_t>(family.order());
  std::vector<std::vector<StableSum>> sums(k, std::vector<StableSum>(order));
  std::vector<long> counts(k, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    ++counts[assignment[i]];
    for (std::size_t c = 0; c < order; ++c) sums[assignment[i]][c].add(t_points[i][c]);
  }
  model.weights.resize(k);
  model.components.resize(k);
  for (int j = 0; j < k; ++j) {
    if (counts[j] == 0) {
      throw DataError(family.name() + ": degenerate cluster " + std::to_string(j) +
                      " (empty after hard clustering)");
    }
    model.weights[j] = static_cast<double>(counts[j]) / data.size();
    model.components[j].resize(order);
    for (std::size_t c = 0; c < order; ++c) {
      model.components[j][c] = sums[j][c].value() / static_cast<double>(counts[j]);
    }
    if (!family.in_expectation_domain(model.components[j])) {
      throw DataError(family.name() + ": degenerate cluster " + std::to_string(j) +
                      " (observed point on the expectation-domain boundary)");
    }
  }
  return model;
}

/// Expectation step. Row i is the posterior over components for x_i,
/// computed from the conjugate form
///   p(i,j) proportional to w_j exp(G(eta_j) + <t(x_i) - eta_j, grad G(eta_j)>)
/// with log-domain max subtraction; carrier terms cancel row-wise.
/// Rows may be processed by several worker threads; results are
/// bit-identical for any thread count.
inline Responsibilities em_expectation(const MixtureModel& model,
                                       std::span<const Observation> data,
                                       int threads = 1) {
  validate_mixture(model);
  const std::size_t n = data.size();
  const std::size_t k = model.size();
  const auto views = detail::component_views(model);

  // Score offsets: log w_j + G(eta_j) - <eta_j, theta_j>.
  std::vector<double> offsets(k);
  for (std::size_t j = 0; j < k; ++j) {
    offsets[j] = views[j].log_weight + views[j].conjugate -
                 dot(model.components[j], views[j].theta);
  }

  Responsibilities resp{n, k, std::vector<double>(n * k, 0.0)};
  std::string first_error;

  auto process_rows = [&](std::size_t begin, std::size_t end, std::string& error) {
    std::vector<double> scores(k);
    for (std::size_t i = begin; i < end; ++i) {
      const auto t = model.family->sufficient_statistic(data[i]);
      double top = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        scores[j] = offsets[j] + dot(t, views[j].theta);
        top = std::max(top, scores[j]);
      }
      if (!std::isfinite(top)) {
        if (error.empty()) {
          error = "em_expectation: all components underflowed at row " +
                  std::to_string(i);
        }
        return;
      }
      double total = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        scores[j] = std::exp(scores[j] - top);
        total += scores[j];
      }
      for (std::size_t j = 0; j < k; ++j) resp(i, j) = scores[j] / total;
    }
  };

  if (threads <= 1 || n < 512) {
    process_rows(0, n, first_error);
  } else {
    const std::size_t workers = std::min<std::size_t>(threads, 64);
    std::vector<std::string> errors(workers);
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&, begin, end, w] { process_rows(begin, end, errors[w]); });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (!e.empty()) {
        first_error = e;
        break;
      }
    }
  }
  if (!first_error.empty()) throw NumericalError(first_error);
  return resp;
}

/// Maximization step: w_j = column mean of responsibilities, eta_j the
/// responsibility-weighted mean of sufficient statistics (fixed order).
inline MixtureModel em_maximization(FamilyPtr family_ptr,
                                    std::span<const Observation> data,
                                    const Responsibilities& resp) {
  if (!family_ptr) throw DataError("em_maximization: missing family");
  const Family& family = *family_ptr;
  const std::size_t n = data.size();
  const std::size_t k = resp.cols;
  if (resp.rows != n) throw DataError("em_maximization: responsibility shape mismatch");
  const std::size_t order = static_cast<std::size_t>(family.order());

  std::vector<StableSum> weight_sums(k);
  std::vector<std::vector<StableSum>> stat_sums(k, std::vector<StableSum>(order));
  for (std::size_t i = 0; i < n; ++i) {
    const auto t = family.sufficient_statistic(data[i]);
    for (std::size_t j = 0; j < k; ++j) {
      const double r = resp(i, j);
      weight_sums[j].add(r);
      for (std::size_t c = 0; c < order; ++c) stat_sums[j][c].add(r * t[c]);
    }
  }

  MixtureModel model;
  model.family = family_ptr;
  model.weights.resize(k);
  model.components.assign(k, std::vector<double>(order));
  for (std::size_t j = 0; j < k; ++j) {
    const double total = weight_sums[j].value();
    if (total < 1e-12) {
      throw DataError(family.name() + ": component " + std::to_string(j) +
                      " vanished in the maximization step");
    }
    model.weights[j] = total / static_cast<double>(n);
    for (std::size_t c = 0; c < order; ++c) {
      model.components[j][c] = stat_sums[j][c].value() / total;
    }
    if (!family.in_expectation_domain(model.components[j])) {
      throw DataError(family.name() + ": component " + std::to_string(j) +
                      " collapsed onto the expectation-domain boundary");
    }
  }
  // Renormalize away the last-digit drift so downstream validation holds.
  double wsum = 0.0;
  for (double w : model.weights) wsum += w;
  for (double& w : model.weights) w /= wsum;
  return model;
}

/// Full EM loop from the hard-clustering initialization. Stops when the
/// relative change of the average log-likelihood drops below rel_tol.
inline std::pair<MixtureModel, FitTrace> em_fit(FamilyPtr family,
                                                std::span<const Observation> data, int k,
                                                int max_iter, double rel_tol, RngSeed seed,
                                                int threads = 1) {
  if (!family) throw DataError("em_fit: missing family");
  MixtureModel model = em_init(family, data, k, seed);

  auto average_log_likelihood = [&](const MixtureModel& m) {
    StableSum acc;
    for (const auto& x : data) acc.add(mixture_log_density(m, x));
    return acc.value() / static_cast<double>(data.size());
  };

  FitTrace trace;
  trace.average_log_likelihood.push_back(average_log_likelihood(model));
  for (int iter = 0; iter < max_iter; ++iter) {
    const Responsibilities resp = em_expectation(model, data, threads);
    model = em_maximization(family, data, resp);
    const double ll = average_log_likelihood(model);
    const double prev = trace.average_log_likelihood.back();
    trace.average_log_likelihood.push_back(ll);
    trace.iterations_run = iter + 1;
    if (std::abs(ll - prev) < rel_tol * (1.0 + std::abs(prev))) {
      trace.converged = true;
      break;
    }
  }
  return {std::move(model), std::move(trace)};
}

namespace detail {

inline void require_same_family(const MixtureModel& f, const MixtureModel& g) {
  validate_mixture(f);
  validate_mixture(g);
  if (f.family->name() != g.family->name() ||
      f.family->descriptor().fixed_hyperparams !=
          g.family->descriptor().fixed_hyperparams) {
    throw DomainError("mixture KL: the two mixtures must share one family");
  }
}

inline double bregman_f_raw(const Family& family, const std::vector<double>& a,
                            const std::vector<double>& b) {
  const auto grad_b = family.grad_log_normalizer(b);
  double acc = family.log_normalizer(a) - family.log_normalizer(b);
  for (std::size_t i = 0; i < a.size(); ++i) acc -= (a[i] - b[i]) * grad_b[i];
  return acc;
}

}  // namespace detail

/// Jensen upper bound sum_i sum_j w_i w'_j B_F(theta'_j || theta_i).
inline double mixture_kl_jensen_bound(const MixtureModel& f, const MixtureModel& g) {
  detail::require_same_family(f, g);
  const auto fv = detail::component_views(f);
  const auto gv = detail::component_views(g);
  StableSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      acc.add(f.weights[i] * g.weights[j] *
              detail::bregman_f_raw(*f.family, gv[j].theta, fv[i].theta));
    }
  }
  return acc.value();
}

/// Matching approximation: each component of f is paired with its closest
/// component of g; the weight-ratio term uses the matched index.
inline double mixture_kl_matching(const MixtureModel& f, const MixtureModel& g) {
  detail::require_same_family(f, g);
  const auto fv = detail::component_views(f);
  const auto gv = detail::component_views(g);
  StableSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double b = detail::bregman_f_raw(*f.family, gv[j].theta, fv[i].theta);
      if (b < best) {
        best = b;
        best_j = j;
      }
    }
    acc.add(f.weights[i] * (best + std::log(f.weights[i] / g.weights[best_j])));
  }
  return acc.value();
}

/// Unscented approximation for the Gaussian catalog entries. Each
/// component contributes 2d sigma points mu +- columns of chol(d Sigma),
/// where Sigma is the observation block of the Hessian of F; both log f
/// and log g are evaluated so that identical mixtures give exactly zero.
inline double mixture_kl_unscented(const MixtureModel& f, const MixtureModel& g) {
  detail::require_same_family(f, g);
  const std::string& name = f.family->name();
  if (name != "univariate_gaussian" && name != "gaussian_fixed_variance" &&
      name != "multivariate_gaussian" && name != "isotropic_gaussian") {
    throw DomainError("mixture_kl_unscented: only Gaussian families supported");
  }
  const int d = f.family->obs_dim();
  const auto views = detail::component_views(f);
  StableSum acc;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Matrix hessian = f.family->log_normalizer_hessian(views[i].theta);
    Matrix sigma(d, d);
    for (int r = 0; r < d; ++r)
      for (int c = 0; c < d; ++c) sigma(r, c) = d * hessian(r, c);
    const auto chol = cholesky(sigma);
    if (!chol) {
      throw NumericalError("mixture_kl_unscented: component covariance not positive "
                           "definite");
    }
    StableSum inner;
    for (int column = 0; column < d; ++column) {
      for (int sign : {+1, -1}) {
        Observation x(f.components[i].begin(), f.components[i].begin() + d);
        for (int r = 0; r < d; ++r) x[r] += sign * (*chol)(r, column);
        inner.add(mixture_log_density(f, x) - mixture_log_density(g, x));
      }
    }
    acc.add(f.weights[i] * inner.value());
  }
  return acc.value() / (2.0 * d);
}

/// Monte-Carlo estimate of KL(f || g): mean of log f - log g under f.
inline McEstimate mixture_kl_monte_carlo(const MixtureModel& f, const MixtureModel& g,
                                         long n, RngSeed seed) {
  detail::require_same_family(f, g);
  const MixtureSample draws = sample_mixture(f, n, seed);
  StableSum sum, sum_sq;
  for (const auto& x : draws.observations) {
    const double value = mixture_log_density(f, x) - mixture_log_density(g, x);
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
