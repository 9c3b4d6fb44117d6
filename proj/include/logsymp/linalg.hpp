// Dense matrices over an exact field (Scalar or mpq_class) and Gaussian elimination.
#pragma once

#include "logsymp/scalar.hpp"

#include <stdexcept>
#include <vector>

namespace logsymp {

inline bool field_is_zero(const Scalar& s) { return s.is_zero(); }
inline bool field_is_zero(const mpq_class& q) { return q == 0; }
inline std::size_t field_complexity(const Scalar& s) { return s.is_constant() ? 0 : s.complexity(); }
inline std::size_t field_complexity(const mpq_class& q) {
  return mpz_sizeinbase(q.get_num_mpz_t(), 2) + mpz_sizeinbase(q.get_den_mpz_t(), 2);
}

template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, T(0)) {}
  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = T(1);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  T& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const T& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }
  Matrix operator*(const Matrix& o) const {
    if (cols_ != o.rows_) throw std::invalid_argument("matrix dimension mismatch");
    Matrix r(rows_, o.cols_);
    for (int i = 0; i < rows_; ++i)
      for (int k = 0; k < cols_; ++k) {
        const T& a = (*this)(i, k);
        if (field_is_zero(a)) continue;
        for (int j = 0; j < o.cols_; ++j)
          if (!field_is_zero(o(k, j))) r(i, j) += a * o(k, j);
      }
    return r;
  }
  Matrix operator+(const Matrix& o) const {
    check_same(o);
    Matrix r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] += o.data_[i];
    return r;
  }
  Matrix operator-(const Matrix& o) const {
    check_same(o);
    Matrix r = *this;
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] -= o.data_[i];
    return r;
  }
  Matrix operator-() const {
    Matrix r = *this;
    for (auto& x : r.data_) x = -x;
    return r;
  }
  bool operator==(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }
  bool operator!=(const Matrix& o) const { return !(*this == o); }
  bool is_zero() const {
    for (const auto& x : data_)
      if (!field_is_zero(x)) return false;
    return true;
  }
  std::vector<T> column(int j) const {
    std::vector<T> c(rows_);
    for (int i = 0; i < rows_; ++i) c[i] = (*this)(i, j);
    return c;
  }
  std::vector<T> row(int i) const {
    return std::vector<T>(data_.begin() + static_cast<std::ptrdiff_t>(i) * cols_,
                          data_.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols_);
  }
  static Matrix from_columns(int rows, const std::vector<std::vector<T>>& columns) {
    Matrix m(rows, static_cast<int>(columns.size()));
    for (int j = 0; j < m.cols_; ++j)
      for (int i = 0; i < rows; ++i) m(i, j) = columns[j].at(i);
    return m;
  }
  static Matrix from_rows(int cols, const std::vector<std::vector<T>>& rows) {
    Matrix m(static_cast<int>(rows.size()), cols);
    for (int i = 0; i < m.rows_; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = rows[i].at(j);
    return m;
  }
  template <class F>
  auto map(F f) const -> Matrix<decltype(f(std::declval<const T&>()))> {
    Matrix<decltype(f(std::declval<const T&>()))> r(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) r(i, j) = f((*this)(i, j));
    return r;
  }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<T> data_;
  void check_same(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix dimension mismatch");
  }
};

/// Reduced row echelon form in place; returns pivot columns in increasing order.
/// Pivots are searched left to right; among candidate rows the simplest entry wins.
template <class T>
std::vector<int> rref(Matrix<T>& m) {
  std::vector<int> pivots;
  int row = 0;
  for (int col = 0; col < m.cols() && row < m.rows(); ++col) {
    int best = -1;
    std::size_t best_cost = 0;
    for (int i = row; i < m.rows(); ++i) {
      if (field_is_zero(m(i, col))) continue;
      std::size_t cost = field_complexity(m(i, col));
      if (best < 0 || cost < best_cost) {
        best = i;
        best_cost = cost;
      }
    }
    if (best < 0) continue;
    if (best != row)
      for (int j = 0; j < m.cols(); ++j) std::swap(m(best, j), m(row, j));
    T inv = T(1) / m(row, col);
    for (int j = col; j < m.cols(); ++j)
      if (!field_is_zero(m(row, j))) m(row, j) *= inv;
    for (int i = 0; i < m.rows(); ++i) {
      if (i == row || field_is_zero(m(i, col))) continue;
      T f = m(i, col);
      for (int j = col; j < m.cols(); ++j)
        if (!field_is_zero(m(row, j))) m(i, j) -= f * m(row, j);
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class T>
int rank(Matrix<T> m) {
  return static_cast<int>(rref(m).size());
}

/// Basis of the right kernel; basis vector k has a one in the k-th free column
/// and zeros in the other free columns.
template <class T>
std::vector<std::vector<T>> nullspace(Matrix<T> m, std::vector<int>* free_columns = nullptr) {
  std::vector<int> pivots = rref(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (int p : pivots) is_pivot[p] = true;
  std::vector<std::vector<T>> basis;
  if (free_columns) free_columns->clear();
  for (int f = 0; f < m.cols(); ++f) {
    if (is_pivot[f]) continue;
    std::vector<T> v(m.cols(), T(0));
    v[f] = T(1);
    for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m(static_cast<int>(r), f);
    basis.push_back(std::move(v));
    if (free_columns) free_columns->push_back(f);
  }
  return basis;
}

template <class T>
T determinant(Matrix<T> m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("determinant of a non-square matrix");
  const int n = m.rows();
  T det(1);
  for (int col = 0; col < n; ++col) {
    int best = -1;
    std::size_t best_cost = 0;
    for (int i = col; i < n; ++i) {
      if (field_is_zero(m(i, col))) continue;
      std::size_t cost = field_complexity(m(i, col));
      if (best < 0 || cost < best_cost) {
        best = i;
        best_cost = cost;
      }
    }
    if (best < 0) return T(0);
    if (best != col) {
      for (int j = 0; j < n; ++j) std::swap(m(best, j), m(col, j));
      det = -det;
    }
    det *= m(col, col);
    T inv = T(1) / m(col, col);
    for (int i = col + 1; i < n; ++i) {
      if (field_is_zero(m(i, col))) continue;
      T f = m(i, col) * inv;
      for (int j = col; j < n; ++j)
        if (!field_is_zero(m(col, j))) m(i, j) -= f * m(col, j);
    }
  }
  return det;
}

class SingularMatrixError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

template <class T>
Matrix<T> inverse(const Matrix<T>& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("inverse of a non-square matrix");
  const int n = m.rows();
  Matrix<T> aug(n, 2 * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) aug(i, j) = m(i, j);
    aug(i, n + i) = T(1);
  }
  std::vector<int> pivots = rref(aug);
  if (static_cast<int>(pivots.size()) < n || (n > 0 && pivots[n - 1] != n - 1))
    throw SingularMatrixError("matrix is singular");
  Matrix<T> inv(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) inv(i, j) = aug(i, n + j);
  return inv;
}

/// Coordinates of v in the span of the given columns, or false when v is not in the span.
template <class T>
bool solve_in_span(const std::vector<std::vector<T>>& columns, const std::vector<T>& v, std::vector<T>& coords) {
  const int n = static_cast<int>(v.size());
  const int k = static_cast<int>(columns.size());
  Matrix<T> aug(n, k + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) aug(i, j) = columns[j].at(i);
    aug(i, k) = v[i];
  }
  std::vector<int> pivots = rref(aug);
  if (!pivots.empty() && pivots.back() == k) return false;
  coords.assign(k, T(0));
  for (std::size_t r = 0; r < pivots.size(); ++r) coords[pivots[r]] = aug(static_cast<int>(r), k);
  return true;
}

Matrix<mpq_class> evaluate(const Matrix<Scalar>& m, const std::vector<mpq_class>& point);
Matrix<double> evaluate(const Matrix<Scalar>& m, const std::vector<double>& point);

}  // namespace logsymp
