#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "flowcast/common.hpp"

namespace flowcast::linalg {

// Dense row-major matrix of doubles. Deliberately minimal: the solvers below
// only need what the regression models use.
class Matrix {
 public:
  Matrix() = default;
  Matrix(size_t rows, size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  double& operator()(size_t r, size_t c) { return data_[r * cols_ + c]; }
  double operator()(size_t r, size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

 private:
  size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (size_t r = 0; r < a.rows(); ++r)
    for (size_t c = 0; c < a.cols(); ++c) t(c, r) = a(r, c);
  return t;
}

inline Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw ShapeError("matrix multiply shape mismatch");
  Matrix out(a.rows(), b.cols(), 0.0);
  for (size_t i = 0; i < a.rows(); ++i)
    for (size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

inline std::vector<double> multiply_vec(const Matrix& a, const std::vector<double>& x) {
  if (a.cols() != x.size()) throw ShapeError("matrix-vector shape mismatch");
  std::vector<double> out(a.rows(), 0.0);
  for (size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    out[i] = acc;
  }
  return out;
}

// Gram matrix X^T X (symmetric), computed directly to avoid the transpose copy.
inline Matrix gram(const Matrix& x) {
  Matrix g(x.cols(), x.cols(), 0.0);
  for (size_t r = 0; r < x.rows(); ++r)
    for (size_t i = 0; i < x.cols(); ++i) {
      double xi = x(r, i);
      if (xi == 0.0) continue;
      for (size_t j = i; j < x.cols(); ++j) g(i, j) += xi * x(r, j);
    }
  for (size_t i = 0; i < x.cols(); ++i)
    for (size_t j = 0; j < i; ++j) g(i, j) = g(j, i);
  return g;
}

inline std::vector<double> xty(const Matrix& x, const std::vector<double>& y) {
  if (x.rows() != y.size()) throw ShapeError("X^T y shape mismatch");
  std::vector<double> out(x.cols(), 0.0);
  for (size_t r = 0; r < x.rows(); ++r)
    for (size_t c = 0; c < x.cols(); ++c) out[c] += x(r, c) * y[r];
  return out;
}

// In-place Cholesky factorization A = L L^T of a symmetric positive-definite
// matrix. Throws NumericalError when a pivot is not strictly positive.
inline Matrix cholesky(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("cholesky requires a square matrix");
  size_t n = a.rows();
  Matrix l(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j <= i; ++j) {
      double sum = a(i, j);
      for (size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      if (i == j) {
        if (sum <= 0.0) throw NumericalError("cholesky pivot not positive: matrix not positive definite");
        l(i, i) = std::sqrt(sum);
      } else {
        l(i, j) = sum / l(j, j);
      }
    }
  }
  return l;
}

// Solves A x = b given the Cholesky factor L (forward then backward substitution).
inline std::vector<double> cholesky_solve(const Matrix& l, const std::vector<double>& b) {
  size_t n = l.rows();
  if (b.size() != n) throw ShapeError("cholesky_solve shape mismatch");
  std::vector<double> y(n), x(n);
  for (size_t i = 0; i < n; ++i) {
    double sum = b[i];
    for (size_t k = 0; k < i; ++k) sum -= l(i, k) * y[k];
    y[i] = sum / l(i, i);
  }
  for (size_t ii = n; ii-- > 0;) {
    double sum = y[ii];
    for (size_t k = ii + 1; k < n; ++k) sum -= l(k, ii) * x[k];
    x[ii] = sum / l(ii, ii);
  }
  return x;
}

struct EigenResult {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column j is the eigenvector for values[j]
};

// Cyclic Jacobi rotations for a symmetric matrix. Deterministic sweep order;
// converges quadratically for the small systems used here.
inline EigenResult jacobi_eigen(const Matrix& a, int max_sweeps = 100, double tol = 1e-14) {
  if (a.rows() != a.cols()) throw ShapeError("jacobi_eigen requires a square matrix");
  size_t n = a.rows();
  Matrix m = a;
  Matrix v(n, n, 0.0);
  for (size_t i = 0; i < n; ++i) v(i, i) = 1.0;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (size_t i = 0; i < n; ++i)
      for (size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    if (off <= tol * tol) break;
    for (size_t p = 0; p < n; ++p) {
      for (size_t q = p + 1; q < n; ++q) {
        double apq = m(p, q);
        if (std::fabs(apq) < 1e-300) continue;
        double app = m(p, p), aqq = m(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (size_t k = 0; k < n; ++k) {
          double mkp = m(k, p), mkq = m(k, q);
          m(k, p) = c * mkp - s * mkq;
          m(k, q) = s * mkp + c * mkq;
        }
        for (size_t k = 0; k < n; ++k) {
          double mpk = m(p, k), mqk = m(q, k);
          m(p, k) = c * mpk - s * mqk;
          m(q, k) = s * mpk + c * mqk;
        }
        for (size_t k = 0; k < n; ++k) {
          double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  // Sort ascending by eigenvalue (stable selection for determinism).
  EigenResult res;
  res.values.resize(n);
  for (size_t i = 0; i < n; ++i) res.values[i] = m(i, i);
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  for (size_t i = 0; i + 1 < n; ++i) {
    size_t best = i;
    for (size_t j = i + 1; j < n; ++j)
      if (res.values[order[j]] < res.values[order[best]]) best = j;
    std::swap(order[i], order[best]);
  }
  EigenResult sorted;
  sorted.values.resize(n);
  sorted.vectors = Matrix(n, n);
  for (size_t j = 0; j < n; ++j) {
    sorted.values[j] = res.values[order[j]];
    for (size_t i = 0; i < n; ++i) sorted.vectors(i, j) = v(i, order[j]);
  }
  return sorted;
}

// Minimum-norm solve of (possibly singular) symmetric system A x = b via the
// eigendecomposition pseudo-inverse: eigenvalues below rcond * max|lambda| are
// treated as zero.
inline std::vector<double> symmetric_pinv_solve(const Matrix& a, const std::vector<double>& b,
                                                double rcond = 1e-12) {
  auto eig = jacobi_eigen(a);
  size_t n = a.rows();
  double maxabs = 0.0;
  for (double v : eig.values) maxabs = std::max(maxabs, std::fabs(v));
  double cutoff = maxabs * rcond;
  std::vector<double> x(n, 0.0);
  for (size_t j = 0; j < n; ++j) {
    if (std::fabs(eig.values[j]) <= cutoff) continue;
    double proj = 0.0;
    for (size_t i = 0; i < n; ++i) proj += eig.vectors(i, j) * b[i];
    proj /= eig.values[j];
    for (size_t i = 0; i < n; ++i) x[i] += proj * eig.vectors(i, j);
  }
  return x;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw ShapeError("dot shape mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace flowcast::linalg
