#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "expfam/errors.hpp"

namespace expfam {

/// Dense row-major matrix. Everything in this library is small (the
/// largest order in the catalog is d + d^2 for d-dimensional Gaussians),
/// so plain O(n^3) routines are used throughout.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) throw DataError("Matrix: size mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  Matrix transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  std::vector<double> multiply(const std::vector<double>& v) const {
    if (v.size() != cols_) throw DataError("Matrix::multiply: dimension mismatch");
    std::vector<double> out(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * v[j];
      out[i] = acc;
    }
    return out;
  }

  Matrix multiply(const Matrix& other) const {
    if (cols_ != other.rows_) throw DataError("Matrix::multiply: dimension mismatch");
    Matrix out(rows_, other.cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t k = 0; k < cols_; ++k) {
        const double a = (*this)(i, k);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < other.cols_; ++j) out(i, j) += a * other(k, j);
      }
    return out;
  }

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Lower Cholesky factor of a symmetric positive definite matrix, or
/// nullopt if the matrix is not (numerically) positive definite.
inline std::optional<Matrix> cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw DataError("cholesky: matrix must be square");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (!(sum > 0.0)) return std::nullopt;
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return l;
}

/// log det(A) for symmetric positive definite A.
inline double log_det_spd(const Matrix& a) {
  const auto l = cholesky(a);
  if (!l) throw DomainError("log_det_spd: matrix is not positive definite");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += std::log((*l)(i, i));
  return 2.0 * acc;
}

namespace detail {

// LU decomposition with partial pivoting, in place. Returns the permutation
// sign, or 0 if the matrix is singular.
inline int lu_decompose(Matrix& a, std::vector<std::size_t>& perm) {
  const std::size_t n = a.rows();
  perm.resize(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  int sign = 1;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(a(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a(r, col)) > best) {
        best = std::abs(a(r, col));
        pivot = r;
      }
    }
    if (best == 0.0) return 0;
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(pivot, j), a(col, j));
      std::swap(perm[pivot], perm[col]);
      sign = -sign;
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a(r, col) / a(col, col);
      a(r, col) = factor;
      for (std::size_t j = col + 1; j < n; ++j) a(r, j) -= factor * a(col, j);
    }
  }
  return sign;
}

}  // namespace detail

/// Solves A x = b for square A (LU with partial pivoting).
inline std::vector<double> solve(Matrix a, std::vector<double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n || b.size() != n) throw DataError("solve: dimension mismatch");
  std::vector<std::size_t> perm;
  if (detail::lu_decompose(a, perm) == 0) {
    throw NumericalError("solve: singular matrix");
  }
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = b[perm[i]];
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) x[i] -= a(i, j) * x[j];
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) x[i] -= a(i, j) * x[j];
    x[i] /= a(i, i);
  }
  return x;
}

inline double determinant(Matrix a) {
  if (a.rows() != a.cols()) throw DataError("determinant: matrix must be square");
  std::vector<std::size_t> perm;
  const int sign = detail::lu_decompose(a, perm);
  if (sign == 0) return 0.0;
  double det = static_cast<double>(sign);
  for (std::size_t i = 0; i < a.rows(); ++i) det *= a(i, i);
  return det;
}

inline Matrix inverse(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw DataError("inverse: matrix must be square");
  Matrix lu = a;
  std::vector<std::size_t> perm;
  if (detail::lu_decompose(lu, perm) == 0) {
    throw NumericalError("inverse: singular matrix");
  }
  Matrix out(n, n);
  for (std::size_t col = 0; col < n; ++col) {
    std::vector<double> x(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) x[i] = (perm[i] == col) ? 1.0 : 0.0;
    for (std::size_t i = 1; i < n; ++i)
      for (std::size_t j = 0; j < i; ++j) x[i] -= lu(i, j) * x[j];
    for (std::size_t i = n; i-- > 0;) {
      for (std::size_t j = i + 1; j < n; ++j) x[i] -= lu(i, j) * x[j];
      x[i] /= lu(i, i);
    }
    for (std::size_t i = 0; i < n; ++i) out(i, col) = x[i];
  }
  return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DataError("dot: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace expfam
