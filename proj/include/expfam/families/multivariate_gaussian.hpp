#pragma once

#include <cmath>

#include "expfam/families/univariate_gaussian.hpp"
#include "expfam/family.hpp"

namespace expfam::families {

/// N(mu, Sigma) on R^d. Source (mu, Sigma), t(x) = (x, -x x^T),
/// Theta = (Sigma^{-1} mu, Sigma^{-1}/2), H = (mu, -(Sigma + mu mu^T)).
/// The matrix block is stored flattened row-major; the inner product on
/// that block is the matrix trace of the product.
class MultivariateGaussian final : public Family {
public:
  explicit MultivariateGaussian(int d)
      : Family({.name = "multivariate_gaussian",
                .obs_dim = d,
                .order = d + d * d,
                .support = SupportKind::real_line,
                .has_closed_conjugate = true,
                .carrier_is_zero = true,
                .has_closed_kl = true,
                .has_closed_mle = true,
                .fixed_hyperparams = {{"d", static_cast<double>(d)}}}),
        d_(d) {
    if (d < 1) throw DomainError("multivariate_gaussian: d must be >= 1");
  }

  bool in_support(const Observation& x) const override {
    for (double v : x)
      if (!std::isfinite(v)) return false;
    return true;
  }
  bool in_natural_domain(const std::vector<double>& theta) const override {
    return is_spd(matrix_block(theta));
  }
  bool in_expectation_domain(const std::vector<double>& eta) const override {
    return is_spd(covariance_from_eta(eta));
  }
  bool in_source_domain(const std::vector<double>& lambda) const override {
    return is_spd(matrix_block(lambda));
  }

  std::optional<double> kl_closed_form(const std::vector<double>& p,
                                       const std::vector<double>& q) const override {
    const Matrix sp = matrix_block(p), sq = matrix_block(q);
    const Matrix sq_inv = inverse(sq);
    double trace = 0.0;
    const Matrix prod = sq_inv.multiply(sp);
    for (int i = 0; i < d_; ++i) trace += prod(i, i);
    std::vector<double> dmu(d_);
    for (int i = 0; i < d_; ++i) dmu[i] = q[i] - p[i];
    const double quad = dot(dmu, sq_inv.multiply(dmu));
    return 0.5 * (log_det_spd(sq) - log_det_spd(sp) + trace + quad - d_);
  }

  std::optional<std::vector<double>> mle_closed_form(
      std::span<const Observation> samples) const override {
    const double n = static_cast<double>(samples.size());
    std::vector<double> mean(d_, 0.0);
    for (int i = 0; i < d_; ++i) {
      StableSum acc;
      for (const auto& x : samples) acc.add(x[i]);
      mean[i] = acc.value() / n;
    }
    Matrix cov(d_, d_);
    for (int i = 0; i < d_; ++i) {
      for (int j = i; j < d_; ++j) {
        StableSum acc;
        for (const auto& x : samples) acc.add((x[i] - mean[i]) * (x[j] - mean[j]));
        cov(i, j) = cov(j, i) = acc.value() / n;
      }
    }
    if (!cholesky(cov)) {
      throw DataError("multivariate_gaussian: degenerate sample (singular covariance)");
    }
    std::vector<double> lambda = mean;
    lambda.insert(lambda.end(), cov.data().begin(), cov.data().end());
    return lambda;
  }

  std::vector<ParamField> source_fields() const override {
    return {{"mu", d_}, {"sigma", d_ * d_}};
  }

protected:
  std::vector<double> t_(const Observation& x) const override {
    std::vector<double> t(static_cast<std::size_t>(d_ + d_ * d_));
    for (int i = 0; i < d_; ++i) t[i] = x[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) t[d_ + i * d_ + j] = -x[i] * x[j];
    return t;
  }
  double k_(const Observation&) const override { return 0.0; }

  // As a function of the d^2 free matrix coordinates, the log-normalizer
  // depends only on the symmetric part of the block (t duplicates the
  // off-diagonal statistics), so the hooks symmetrize first. This makes
  // finite-difference Hessians match the covariance of t(X).
  double F_(const std::vector<double>& th) const override {
    const std::vector<double> v = vector_block(th);
    const Matrix m = symmetrized_matrix_block(th);
    const double det = determinant(m);
    const std::vector<double> a = solve(m, v);
    return 0.25 * dot(v, a) - 0.5 * std::log(det) + 0.5 * d_ * std::log(M_PI);
  }

  std::vector<double> gradF_(const std::vector<double>& th) const override {
    const std::vector<double> v = vector_block(th);
    const Matrix m_inv = inverse(symmetrized_matrix_block(th));
    const std::vector<double> a = m_inv.multiply(v);
    std::vector<double> grad(th.size());
    for (int i = 0; i < d_; ++i) grad[i] = 0.5 * a[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        grad[d_ + i * d_ + j] = -0.5 * m_inv(i, j) - 0.25 * a[i] * a[j];
      }
    return grad;
  }

  std::optional<double> G_closed_(const std::vector<double>& eta) const override {
    return -0.5 * log_det_spd(covariance_from_eta(eta)) -
           0.5 * d_ * (1.0 + kLogTwoPi);
  }

  std::vector<double> gradG_(const std::vector<double>& eta) const override {
    const Matrix sigma_inv = inverse(covariance_from_eta(eta));
    const std::vector<double> mu = vector_block(eta);
    std::vector<double> theta(eta.size());
    const std::vector<double> smu = sigma_inv.multiply(mu);
    for (int i = 0; i < d_; ++i) theta[i] = smu[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) theta[d_ + i * d_ + j] = 0.5 * sigma_inv(i, j);
    return theta;
  }

  std::vector<double> to_natural_(const std::vector<double>& l) const override {
    const Matrix sigma_inv = inverse(matrix_block(l));
    const std::vector<double> mu = vector_block(l);
    std::vector<double> theta(l.size());
    const std::vector<double> smu = sigma_inv.multiply(mu);
    for (int i = 0; i < d_; ++i) theta[i] = smu[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) theta[d_ + i * d_ + j] = 0.5 * sigma_inv(i, j);
    return theta;
  }

  std::vector<double> to_source_(const std::vector<double>& th) const override {
    const Matrix m_inv = inverse(matrix_block(th));
    const std::vector<double> v = vector_block(th);
    const std::vector<double> a = m_inv.multiply(v);
    std::vector<double> lambda(th.size());
    for (int i = 0; i < d_; ++i) lambda[i] = 0.5 * a[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) lambda[d_ + i * d_ + j] = 0.5 * m_inv(i, j);
    return lambda;
  }

  std::vector<double> lambda_to_eta_(const std::vector<double>& l) const override {
    const std::vector<double> mu = vector_block(l);
    std::vector<double> eta(l.size());
    for (int i = 0; i < d_; ++i) eta[i] = mu[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        eta[d_ + i * d_ + j] = -(l[d_ + i * d_ + j] + mu[i] * mu[j]);
      }
    return eta;
  }

  std::vector<double> eta_to_lambda_(const std::vector<double>& eta) const override {
    const Matrix sigma = covariance_from_eta(eta);
    std::vector<double> lambda(eta.size());
    for (int i = 0; i < d_; ++i) lambda[i] = eta[i];
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) lambda[d_ + i * d_ + j] = sigma(i, j);
    return lambda;
  }

  Observation sample_one_(const std::vector<double>& l, Rng& rng) const override {
    const auto chol = cholesky(matrix_block(l));
    Observation x(vector_block(l));
    std::vector<double> z(static_cast<std::size_t>(d_));
    for (int i = 0; i < d_; ++i) z[i] = rng.normal();
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j <= i; ++j) x[i] += (*chol)(i, j) * z[j];
    return x;
  }

private:
  std::vector<double> vector_block(const std::vector<double>& flat) const {
    return std::vector<double>(flat.begin(), flat.begin() + d_);
  }
  Matrix matrix_block(const std::vector<double>& flat) const {
    Matrix m(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) m(i, j) = flat[d_ + i * d_ + j];
    return m;
  }
  Matrix symmetrized_matrix_block(const std::vector<double>& flat) const {
    Matrix m = matrix_block(flat);
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j) {
        const double avg = 0.5 * (m(i, j) + m(j, i));
        m(i, j) = m(j, i) = avg;
      }
    return m;
  }
  Matrix covariance_from_eta(const std::vector<double>& eta) const {
    Matrix sigma(d_, d_);
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) {
        sigma(i, j) = -(eta[d_ + i * d_ + j] + eta[i] * eta[j]);
      }
    return sigma;
  }
  bool is_spd(const Matrix& m) const {
    double scale = 1.0;
    for (int i = 0; i < d_; ++i)
      for (int j = 0; j < d_; ++j) scale = std::max(scale, std::abs(m(i, j)));
    for (int i = 0; i < d_; ++i)
      for (int j = i + 1; j < d_; ++j) {
        if (std::abs(m(i, j) - m(j, i)) > 1e-9 * scale) return false;
      }
    return cholesky(m).has_value();
  }

  int d_;
};

}  // namespace expfam::families
