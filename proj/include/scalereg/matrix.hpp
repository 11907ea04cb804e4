#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace scalereg {

using Vector = std::vector<double>;

inline double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double euclidean_norm(const Vector& v) { return std::sqrt(dot(v, v)); }

/// Dense row-major matrix. Networks here are desk-scale, so no attempt at
/// blocking or sparsity.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  Vector& data() { return data_; }
  const Vector& data() const { return data_; }

  // y = A x
  void multiply(const Vector& x, Vector& y) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector dimension mismatch");
    y.assign(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* row = &data_[i * cols_];
      double s = 0.0;
      for (std::size_t j = 0; j < cols_; ++j) s += row[j] * x[j];
      y[i] = s;
    }
  }

  // y = A^T d
  void multiply_transpose(const Vector& d, Vector& y) const {
    if (d.size() != rows_) throw std::invalid_argument("matrix-vector dimension mismatch");
    y.assign(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
      const double* row = &data_[i * cols_];
      const double di = d[i];
      for (std::size_t j = 0; j < cols_; ++j) y[j] += row[j] * di;
    }
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  Vector data_;
};

inline void add_scaled_outer(Matrix& grad, const Vector& d, const Vector& a, double w) {
  for (std::size_t i = 0; i < grad.rows(); ++i) {
    const double wd = w * d[i];
    for (std::size_t j = 0; j < grad.cols(); ++j) grad(i, j) += wd * a[j];
  }
}

/// Largest singular value by power iteration on A^T A. Deterministic all-ones
/// start; falls back to the largest-norm column's basis vector when the start
/// is annihilated by A. Throws on non-convergence, reporting the residual.
inline double spectral_norm(const Matrix& a, double tol = 1e-10, int max_iters = 10000) {
  if (a.size() == 0) return 0.0;
  bool zero = true;
  for (double v : a.data())
    if (v != 0.0) {
      zero = false;
      break;
    }
  if (zero) return 0.0;

  Vector v(a.cols(), 1.0 / std::sqrt(static_cast<double>(a.cols())));
  Vector w, u;
  a.multiply(v, w);
  if (euclidean_norm(w) == 0.0) {
    std::size_t best = 0;
    double best_norm = -1.0;
    for (std::size_t j = 0; j < a.cols(); ++j) {
      double s = 0.0;
      for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, j) * a(i, j);
      if (s > best_norm) {
        best_norm = s;
        best = j;
      }
    }
    v.assign(a.cols(), 0.0);
    v[best] = 1.0;
  }

  double sigma = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    a.multiply(v, w);
    const double s = euclidean_norm(w);
    a.multiply_transpose(w, u);
    const double un = euclidean_norm(u);
    if (un == 0.0) return s;  // v is exactly a singular vector
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = u[j] / un;
    if (std::abs(s - sigma) <= tol * std::max(1.0, s)) return s;
    sigma = s;
  }
  a.multiply(v, w);
  const double s = euclidean_norm(w);
  throw std::runtime_error("power iteration did not converge: residual " +
                           std::to_string(std::abs(s - sigma)));
}

}  // namespace scalereg
