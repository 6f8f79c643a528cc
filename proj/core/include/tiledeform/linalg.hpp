#pragma once

// Dense exact linear algebra over mpq_class / Quad. Templates only; the
// matrices in this project are at most a few hundred rows so dense storage
// with zero-skipping elimination is enough.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tiledeform/quad.hpp"

namespace tiledeform {

template <typename T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, T(0L)) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T(1L);
    return m;
  }

  static Matrix from_columns(const std::vector<std::vector<T>>& cols, std::size_t rows) {
    Matrix m(rows, cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != rows) throw std::invalid_argument("from_columns: ragged input");
      for (std::size_t i = 0; i < rows; ++i) m(i, j) = cols[j][i];
    }
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::vector<T> column(std::size_t j) const {
    std::vector<T> v(rows_);
    for (std::size_t i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
    return v;
  }

  std::vector<T> row(std::size_t i) const {
    return std::vector<T>(data_.begin() + i * cols_, data_.begin() + (i + 1) * cols_);
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  Matrix block_columns(std::size_t first, std::size_t count) const {
    Matrix b(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < count; ++j) b(i, j) = (*this)(i, first + j);
    return b;
  }

  bool is_zero_matrix() const {
    return std::all_of(data_.begin(), data_.end(), [](const T& x) { return is_zero(x); });
  }

  template <typename U>
  Matrix<U> cast() const {
    Matrix<U> m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) m(i, j) = U((*this)(i, j));
    return m;
  }

  friend bool operator==(const Matrix& x, const Matrix& y) {
    return x.rows_ == y.rows_ && x.cols_ == y.cols_ && x.data_ == y.data_;
  }

  friend Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.cols_ != y.rows_) throw std::invalid_argument("matrix product: shape mismatch");
    Matrix r(x.rows_, y.cols_);
    for (std::size_t i = 0; i < x.rows_; ++i)
      for (std::size_t k = 0; k < x.cols_; ++k) {
        const T& a = x(i, k);
        if (is_zero(a)) continue;
        for (std::size_t j = 0; j < y.cols_; ++j) {
          if (!is_zero(y(k, j))) r(i, j) += a * y(k, j);
        }
      }
    return r;
  }

  friend Matrix operator+(Matrix x, const Matrix& y) {
    if (x.rows_ != y.rows_ || x.cols_ != y.cols_) throw std::invalid_argument("matrix sum: shape mismatch");
    for (std::size_t i = 0; i < x.data_.size(); ++i) x.data_[i] += y.data_[i];
    return x;
  }

  friend Matrix operator-(Matrix x, const Matrix& y) {
    if (x.rows_ != y.rows_ || x.cols_ != y.cols_) throw std::invalid_argument("matrix difference: shape mismatch");
    for (std::size_t i = 0; i < x.data_.size(); ++i) x.data_[i] -= y.data_[i];
    return x;
  }

  std::vector<T> apply(const std::vector<T>& v) const {
    if (v.size() != cols_) throw std::invalid_argument("matrix apply: shape mismatch");
    std::vector<T> r(rows_, T(0L));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (!is_zero(v[j]) && !is_zero((*this)(i, j))) r[i] += (*this)(i, j) * v[j];
    return r;
  }

  void swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t j = 0; j < cols_; ++j) std::swap((*this)(a, j), (*this)(b, j));
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using QMatrix = Matrix<mpq_class>;
using QuadMatrix = Matrix<Quad>;
using DMatrix = Matrix<double>;

/// In-place reduced row echelon form. Returns the pivot column of each
/// nonzero row, in order.
template <typename T>
std::vector<std::size_t> rref(Matrix<T>& m) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
    std::size_t p = row;
    while (p < m.rows() && is_zero(m(p, col))) ++p;
    if (p == m.rows()) continue;
    m.swap_rows(p, row);
    const T inv = T(1L) / m(row, col);
    for (std::size_t j = col; j < m.cols(); ++j)
      if (!is_zero(m(row, j))) m(row, j) *= inv;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == row || is_zero(m(i, col))) continue;
      const T factor = m(i, col);
      for (std::size_t j = col; j < m.cols(); ++j)
        if (!is_zero(m(row, j))) m(i, j) -= factor * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <typename T>
std::size_t rank(Matrix<T> m) {
  return rref(m).size();
}

/// Basis of the null space as the columns of the returned matrix. Each
/// basis vector has a 1 at its free variable and 0 at the other free
/// variables, so coordinates w.r.t. this basis are read off at the free
/// positions.
template <typename T>
Matrix<T> kernel(Matrix<T> m, std::vector<std::size_t>* free_columns = nullptr) {
  const auto pivots = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (auto p : pivots) is_pivot[p] = true;
  std::vector<std::size_t> free;
  for (std::size_t j = 0; j < m.cols(); ++j)
    if (!is_pivot[j]) free.push_back(j);
  Matrix<T> basis(m.cols(), free.size());
  for (std::size_t k = 0; k < free.size(); ++k) {
    basis(free[k], k) = T(1L);
    for (std::size_t r = 0; r < pivots.size(); ++r) basis(pivots[r], k) = -m(r, free[k]);
  }
  if (free_columns) *free_columns = free;
  return basis;
}

/// One solution of A x = b, or nullopt when inconsistent.
template <typename T>
std::optional<std::vector<T>> solve(const Matrix<T>& a, const std::vector<T>& b) {
  if (b.size() != a.rows()) throw std::invalid_argument("solve: shape mismatch");
  Matrix<T> aug(a.rows(), a.cols() + 1);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) aug(i, j) = a(i, j);
    aug(i, a.cols()) = b[i];
  }
  const auto pivots = rref(aug);
  std::vector<T> x(a.cols(), T(0L));
  for (std::size_t r = 0; r < pivots.size(); ++r) {
    if (pivots[r] == a.cols()) return std::nullopt;
    x[pivots[r]] = aug(r, a.cols());
  }
  return x;
}

/// Column basis of the image (a subset of the original columns).
template <typename T>
Matrix<T> image_basis(const Matrix<T>& m) {
  Matrix<T> r = m;
  const auto pivots = rref(r);
  Matrix<T> out(m.rows(), pivots.size());
  for (std::size_t k = 0; k < pivots.size(); ++k)
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, k) = m(i, pivots[k]);
  return out;
}

template <typename T>
std::optional<Matrix<T>> inverse(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse: matrix not square");
  const std::size_t n = m.rows();
  if (n == 0) return Matrix<T>(0, 0);
  Matrix<T> aug(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = T(1L);
  }
  const auto pivots = rref(aug);
  if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
  return aug.block_columns(n, n);
}

template <typename T>
Matrix<T> power(const Matrix<T>& m, unsigned e) {
  Matrix<T> result = Matrix<T>::identity(m.rows());
  Matrix<T> base = m;
  while (e) {
    if (e & 1u) result = result * base;
    e >>= 1u;
    if (e) base = base * base;
  }
  return result;
}

/// Concatenate column blocks with equal row counts.
template <typename T>
Matrix<T> hstack(const std::vector<Matrix<T>>& blocks, std::size_t rows) {
  std::size_t cols = 0;
  for (const auto& b : blocks) cols += b.cols();
  Matrix<T> out(rows, cols);
  std::size_t off = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, off + j) = b(i, j);
    off += b.cols();
  }
  return out;
}

inline QuadMatrix to_quad(const QMatrix& m) { return m.cast<Quad>(); }

}  // namespace tiledeform
